#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dbar {

using cdouble = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cdouble kI{0.0, 1.0};

/// Sign fixed by the orientation audit of the solid Cauchy transform.
///
/// Area integrals are written with d(conj t) ^ dt = +2i dx ^ dy, which turns
/// (1/2 pi i) * integral f(t) d(conj t)^dt / (t - z) into (1/pi) * integral
/// f(t)/(t - z) dA. With that convention d/d(conj z) of the transform of f is
/// -f, so every solution operator built on it satisfies dbar(S w) = -w. The
/// value is checked by tests/test_kernel.cpp and the acceptance suite.
inline constexpr int kOrientationSign = -1;

enum class Errc {
  InvalidArgument,
  ParseError,
  MixedDegree,
  ZeroPolynomial,
  DimensionUnknown,
  ZeroCoordinate,
  NewtonDivergence,
  SingularSlice,
  RankDeficient,
  DuplicateIndex,
  DegreeOverflow,
  StencilOutOfDomain,
  AtlasIncomplete,
  QuadratureNonConvergent,
  SupportOverflow,
  DeltaOutOfRange,
  NonIntegrableAtZero,
  NotACone,
  NotClosed,
  SamplerError,
  ConfigError,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::MixedDegree: return "MixedDegree";
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::DimensionUnknown: return "DimensionUnknown";
    case Errc::ZeroCoordinate: return "ZeroCoordinate";
    case Errc::NewtonDivergence: return "NewtonDivergence";
    case Errc::SingularSlice: return "SingularSlice";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::DuplicateIndex: return "DuplicateIndex";
    case Errc::DegreeOverflow: return "DegreeOverflow";
    case Errc::StencilOutOfDomain: return "StencilOutOfDomain";
    case Errc::AtlasIncomplete: return "AtlasIncomplete";
    case Errc::QuadratureNonConvergent: return "QuadratureNonConvergent";
    case Errc::SupportOverflow: return "SupportOverflow";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::NonIntegrableAtZero: return "NonIntegrableAtZero";
    case Errc::NotACone: return "NotACone";
    case Errc::NotClosed: return "NotClosed";
    case Errc::SamplerError: return "SamplerError";
    case Errc::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline cdouble ipow(cdouble x, int e) {
  if (e < 0) return 1.0 / ipow(x, -e);
  cdouble r = 1.0;
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

inline double ipow(double x, int e) {
  if (e < 0) return 1.0 / ipow(x, -e);
  double r = 1.0;
  while (e) {
    if (e & 1) r *= x;
    x *= x;
    e >>= 1;
  }
  return r;
}

/// Worker count: DBAR_THREADS if set, else hardware concurrency.
inline unsigned worker_count() {
  if (const char* env = std::getenv("DBAR_THREADS")) {
    int v = std::atoi(env);
    if (v >= 1) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace detail {
inline thread_local bool in_worker = false;
}

/// Runs body(i) for i in [0, count). Each index writes only its own slot, so
/// results do not depend on the schedule. The first exception is rethrown.
/// Nested calls run serially on the calling worker.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  unsigned workers = std::min<std::size_t>(worker_count(), count);
  if (workers <= 1 || detail::in_worker) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      detail::in_worker = true;
      try {
        for (std::size_t i = w; i < count; i += workers) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace dbar
