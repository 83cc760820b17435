#include "carleman.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "carleman/parser.hpp"
#include "carleman/report.hpp"
#include "carleman/solver.hpp"

struct crl_system {
  std::string source;
  carleman::PolySystem system;
};

struct crl_options {
  carleman::SolveOptions solve;
  std::string shift = "auto";
  std::string matrix_a;
};

struct crl_solution {
  carleman::ClosedFormSolution solution;
};

namespace {

using carleman::Error;
using carleman::ErrorFamily;

thread_local std::string last_error;
thread_local std::string last_stage;

crl_status status_for(const Error& e) {
  switch (carleman::family_of(e.code())) {
    case ErrorFamily::Parse: return CRL_PARSE_ERROR;
    case ErrorFamily::Solver: return CRL_SOLVER_ERROR;
    case ErrorFamily::Usage: return CRL_USAGE_ERROR;
  }
  return CRL_INTERNAL_ERROR;
}

// Appends the offending source line with a caret under the span.
std::string with_snippet(const Error& e, const std::string& source) {
  std::string msg = e.what();
  if (!e.span() || source.empty()) return msg;
  const auto& span = *e.span();
  std::size_t start = std::min(span.start, source.size());
  std::size_t line_begin = source.rfind('\n', start == 0 ? 0 : start - 1);
  line_begin = (line_begin == std::string::npos || start == 0) ? 0 : line_begin + 1;
  if (start > 0 && source[start - 1] == '\n') line_begin = start;
  std::size_t line_end = source.find('\n', line_begin);
  if (line_end == std::string::npos) line_end = source.size();
  std::string line = source.substr(line_begin, line_end - line_begin);
  std::size_t caret_len = std::max<std::size_t>(1, std::min(span.end, line_end) - std::min(start, line_end));
  return msg + "\n  " + line + "\n  " + std::string(span.column - 1, ' ') + std::string(caret_len, '^');
}

template <typename F>
crl_status guarded(F&& body, const std::string& source = {}) {
  try {
    last_error.clear();
    last_stage.clear();
    return body();
  } catch (const Error& e) {
    last_error = with_snippet(e, source);
    last_stage = e.stage();
    return status_for(e);
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return CRL_INTERNAL_ERROR;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Error usage(const std::string& message) { return Error(carleman::ErrorCode::InvalidArgument, message, "options"); }

// Resolves string-valued options against the system's mode.
carleman::SolveOptions resolve(const crl_options* options, const carleman::PolySystem& system) {
  carleman::SolveOptions opts = options ? options->solve : carleman::SolveOptions{};
  std::string shift = options ? options->shift : "auto";
  if (shift == "auto") {
    opts.shift = carleman::ShiftChoice::Auto;
  } else if (shift == "none") {
    opts.shift = carleman::ShiftChoice::None;
  } else {
    opts.shift = carleman::ShiftChoice::Explicit;
    try {
      opts.shift_vector = carleman::parse_scalar_list(shift, system.mode);
    } catch (const Error& e) {
      throw usage("invalid --shift value: " + e.message());
    }
  }
  if (options && !options->matrix_a.empty()) {
    try {
      opts.linear_transform = carleman::matrix_from_json(options->matrix_a, system.mode);
    } catch (const Error& e) {
      throw usage("invalid matrix A: " + e.message());
    }
    const std::size_t expected = system.var_count();
    if (opts.linear_transform->rows() != expected || opts.linear_transform->cols() != expected) {
      throw usage("matrix A must be " + std::to_string(expected) + "x" + std::to_string(expected));
    }
  }
  return opts;
}

#define CRL_REQUIRE(cond, message)                            \
  do {                                                       \
    if (!(cond)) {                                           \
      last_error = message;                                  \
      last_stage = "options";                                \
      return CRL_USAGE_ERROR;                                \
    }                                                        \
  } while (0)

// The system's mode is only known at solve time, so accept values valid in either.
template <typename F>
bool parses_in_some_mode(F&& attempt) {
  std::string message;
  for (auto mode : {carleman::Mode::Exact, carleman::Mode::Float}) {
    try {
      attempt(mode);
      return true;
    } catch (const Error& e) {
      if (message.empty()) message = e.message();
    }
  }
  last_error = message;
  last_stage = "options";
  return false;
}

}  // namespace

extern "C" {

const char* crl_last_error(void) { return last_error.c_str(); }
const char* crl_last_error_stage(void) { return last_stage.c_str(); }
const char* crl_version(void) { return "1.0.0"; }

void crl_string_free(char* s) { std::free(s); }

crl_status crl_system_parse(const char* text, const char* mode, crl_system** out) {
  CRL_REQUIRE(text && out, "null argument");
  std::string source(text);
  return guarded(
      [&] {
        carleman::Mode m = carleman::parse_mode(mode ? mode : "exact");
        auto sys = carleman::parse_system(source, m);
        *out = new crl_system{source, std::move(sys)};
        return CRL_OK;
      },
      source);
}

void crl_system_free(crl_system* system) { delete system; }

crl_status crl_system_render(const crl_system* system, char** out) {
  CRL_REQUIRE(system && out, "null argument");
  return guarded([&] {
    *out = dup(carleman::pretty_print(system->system));
    return CRL_OK;
  });
}

size_t crl_system_variable_count(const crl_system* system) { return system ? system->system.k : 0; }
size_t crl_system_depth(const crl_system* system) { return system ? system->system.depth : 0; }

crl_status crl_options_new(crl_options** out) {
  CRL_REQUIRE(out, "null argument");
  return guarded([&] {
    *out = new crl_options();
    return CRL_OK;
  });
}

void crl_options_free(crl_options* options) { delete options; }

crl_status crl_options_set_order(crl_options* options, unsigned order) {
  CRL_REQUIRE(options, "null argument");
  CRL_REQUIRE(order >= 1, "order must be at least 1");
  options->solve.order = order;
  return CRL_OK;
}

crl_status crl_options_set_shift(crl_options* options, const char* shift) {
  CRL_REQUIRE(options && shift, "null argument");
  CRL_REQUIRE(*shift != '\0', "empty shift");
  std::string text = shift;
  if (text != "auto" && text != "none" && !parses_in_some_mode([&](carleman::Mode m) {
        (void)carleman::parse_scalar_list(text, m);
      })) {
    return CRL_USAGE_ERROR;
  }
  options->shift = std::move(text);
  return CRL_OK;
}

crl_status crl_options_set_matrix_a(crl_options* options, const char* json) {
  CRL_REQUIRE(options, "null argument");
  std::string text = json ? json : "";
  if (!text.empty() && !parses_in_some_mode([&](carleman::Mode m) { (void)carleman::matrix_from_json(text, m); })) {
    return CRL_USAGE_ERROR;
  }
  options->matrix_a = std::move(text);
  return CRL_OK;
}

crl_status crl_options_set_max_power(crl_options* options, unsigned max_power) {
  CRL_REQUIRE(options, "null argument");
  options->solve.max_verify_power = max_power;
  return CRL_OK;
}

crl_status crl_options_set_tolerance(crl_options* options, double tolerance) {
  CRL_REQUIRE(options, "null argument");
  CRL_REQUIRE(tolerance > 0.0 && tolerance < 1.0, "tolerance must lie in (0, 1)");
  options->solve.tolerance = tolerance;
  return CRL_OK;
}

crl_status crl_options_set_seed(crl_options* options, uint64_t seed) {
  CRL_REQUIRE(options, "null argument");
  options->solve.seed = seed;
  return CRL_OK;
}

crl_status crl_solve(const crl_system* system, const crl_options* options, crl_solution** out) {
  CRL_REQUIRE(system && out, "null argument");
  return guarded([&] {
    auto opts = resolve(options, system->system);
    *out = new crl_solution{carleman::solve(system->system, opts)};
    return CRL_OK;
  });
}

void crl_solution_free(crl_solution* solution) { delete solution; }

crl_status crl_solution_render(const crl_solution* solution, const char* format, char** out) {
  CRL_REQUIRE(solution && out, "null argument");
  return guarded([&] {
    *out = dup(carleman::render_solution(solution->solution, carleman::parse_format(format ? format : "text")));
    return CRL_OK;
  });
}

crl_status crl_solution_from_json(const char* json, crl_solution** out) {
  CRL_REQUIRE(json && out, "null argument");
  return guarded([&] {
    *out = new crl_solution{carleman::solution_from_json(json)};
    return CRL_OK;
  });
}

crl_status crl_verify_report(const crl_system* system, const crl_solution* solution, const crl_options* options,
                             const char* format, char** out) {
  CRL_REQUIRE(system && solution && out, "null argument");
  return guarded([&] {
    auto fmt = carleman::parse_format(format ? format : "text");
    auto opts = resolve(options, system->system);
    auto report = carleman::verify(solution->solution, system->system, opts);
    *out = dup(carleman::render_verification(report, solution->solution.order, fmt));
    if (!report.passed()) {
      last_error = "verification failed: " + std::to_string(report.failures.size()) + " coefficient mismatches";
      last_stage = "verify";
      return CRL_VERIFY_FAILED;
    }
    return CRL_OK;
  });
}

crl_status crl_matrix_report(const crl_system* system, const crl_options* options, const char* format, char** out) {
  CRL_REQUIRE(system && out, "null argument");
  return guarded([&] {
    auto fmt = carleman::parse_format(format ? format : "json");
    auto opts = resolve(options, system->system);
    auto prep = carleman::prepare(system->system, opts);
    *out = dup(carleman::render_matrix(carleman::prepared_transition(prep, opts.order), fmt));
    return CRL_OK;
  });
}

crl_status crl_transform_report(const crl_system* system, const crl_options* options, const char* format,
                                char** out) {
  CRL_REQUIRE(system && out, "null argument");
  return guarded([&] {
    auto fmt = carleman::parse_format(format ? format : "text");
    auto opts = resolve(options, system->system);
    *out = dup(carleman::render_transform(carleman::prepare(system->system, opts), fmt));
    return CRL_OK;
  });
}

crl_status crl_eval_report(const crl_system* system, const crl_solution* solution, unsigned step, const char* history,
                           const char* format, char** out) {
  CRL_REQUIRE(system && solution && history && out, "null argument");
  return guarded([&] {
    auto fmt = carleman::parse_format(format ? format : "text");
    const auto& sys = system->system;
    std::vector<carleman::Scalar> flat;
    try {
      flat = carleman::parse_scalar_list(history, sys.mode);
    } catch (const Error& e) {
      throw usage("invalid initial values: " + e.message());
    }
    if (flat.size() != sys.k * sys.depth) {
      throw usage("expected " + std::to_string(sys.k * sys.depth) + " initial values (" + std::to_string(sys.depth) +
                  " steps of " + std::to_string(sys.k) + "), got " + std::to_string(flat.size()));
    }
    std::vector<std::vector<carleman::Scalar>> hist(sys.depth);
    for (std::size_t j = 0; j < sys.depth; ++j) hist[j].assign(flat.begin() + j * sys.k, flat.begin() + (j + 1) * sys.k);
    auto direct = carleman::eval_direct(sys, step, hist);
    auto closed = carleman::eval_closed_form_history(solution->solution, step, hist);
    std::vector<std::string> names = sys.names.empty() ? carleman::default_names(sys.k) : sys.names;
    *out = dup(carleman::render_eval(step, names, direct, closed, fmt));
    return CRL_OK;
  });
}

}  // extern "C"
