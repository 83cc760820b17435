#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "carleman.h"

namespace {

struct Config {
  std::string input;
  std::optional<unsigned> order;
  std::string mode = "exact";
  std::string shift = "auto";
  std::string matrix_a;
  unsigned max_power = 5;
  std::string format = "text";
  std::optional<double> tolerance;
  uint64_t seed = 0;
  std::string output;
  std::string solution;
  unsigned step = 0;
  std::string z0;
};

struct Deleter {
  void operator()(crl_system* p) const { crl_system_free(p); }
  void operator()(crl_options* p) const { crl_options_free(p); }
  void operator()(crl_solution* p) const { crl_solution_free(p); }
  void operator()(char* p) const { crl_string_free(p); }
};
template <typename T>
using Owned = std::unique_ptr<T, Deleter>;

class Failure {
 public:
  explicit Failure(int code) : code_(code) {}
  int code() const { return code_; }

 private:
  int code_;
};

bool read_text(const std::string& path, std::string& out) {
  if (path == "-") {
    out.assign(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
    return true;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

void check(crl_status status, const std::string& context = {}) {
  if (status == CRL_OK) return;
  std::cerr << "error: " << (context.empty() ? "" : context + ": ") << crl_last_error() << "\n";
  throw Failure(static_cast<int>(status));
}

void emit(const Config& cfg, const char* text) {
  if (cfg.output.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(cfg.output, std::ios::binary);
  if (!out || !(out << text)) {
    std::cerr << "error: cannot write " << cfg.output << "\n";
    throw Failure(CRL_USAGE_ERROR);
  }
}

Owned<crl_system> load_system(const Config& cfg) {
  std::string text;
  if (!read_text(cfg.input, text)) {
    std::cerr << "error: cannot read " << cfg.input << "\n";
    throw Failure(CRL_USAGE_ERROR);
  }
  crl_system* sys = nullptr;
  check(crl_system_parse(text.c_str(), cfg.mode.c_str(), &sys), cfg.input);
  return Owned<crl_system>(sys);
}

unsigned default_order() {
  const char* env = std::getenv("CARLEMAN_DEFAULT_ORDER");
  if (!env || !*env) return 6;
  char* end = nullptr;
  long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1000) {
    std::cerr << "error: CARLEMAN_DEFAULT_ORDER must be an integer in [1, 1000], got '" << env << "'\n";
    throw Failure(CRL_USAGE_ERROR);
  }
  return static_cast<unsigned>(v);
}

Owned<crl_options> make_options(const Config& cfg) {
  crl_options* raw = nullptr;
  check(crl_options_new(&raw));
  Owned<crl_options> opts(raw);
  check(crl_options_set_order(raw, cfg.order.value_or(default_order())), "--order");
  check(crl_options_set_shift(raw, cfg.shift.c_str()), "--shift");
  if (!cfg.matrix_a.empty()) {
    std::string a = cfg.matrix_a;
    // a value that is not inline JSON names a file
    if (a.find('[') == std::string::npos && !read_text(a, a)) {
      std::cerr << "error: cannot read matrix file " << cfg.matrix_a << "\n";
      throw Failure(CRL_USAGE_ERROR);
    }
    check(crl_options_set_matrix_a(raw, a.c_str()), "--matrix-a");
  }
  check(crl_options_set_max_power(raw, cfg.max_power), "--max-power");
  if (cfg.tolerance) check(crl_options_set_tolerance(raw, *cfg.tolerance), "--tolerance");
  check(crl_options_set_seed(raw, cfg.seed));
  return opts;
}

Owned<crl_solution> obtain_solution(const Config& cfg, const crl_system* sys, const crl_options* opts) {
  crl_solution* sol = nullptr;
  if (!cfg.solution.empty()) {
    std::string json;
    if (!read_text(cfg.solution, json)) {
      std::cerr << "error: cannot read " << cfg.solution << "\n";
      throw Failure(CRL_USAGE_ERROR);
    }
    check(crl_solution_from_json(json.c_str(), &sol), cfg.solution);
  } else {
    check(crl_solve(sys, opts, &sol));
  }
  return Owned<crl_solution>(sol);
}

int run_solve(const Config& cfg) {
  auto sys = load_system(cfg);
  auto opts = make_options(cfg);
  auto sol = obtain_solution(Config{}, sys.get(), opts.get());
  char* text = nullptr;
  check(crl_solution_render(sol.get(), cfg.format.c_str(), &text));
  Owned<char> owned(text);
  emit(cfg, text);
  return 0;
}

int run_matrix(const Config& cfg) {
  auto sys = load_system(cfg);
  auto opts = make_options(cfg);
  char* text = nullptr;
  check(crl_matrix_report(sys.get(), opts.get(), cfg.format == "text" ? "text" : "json", &text));
  Owned<char> owned(text);
  emit(cfg, text);
  return 0;
}

int run_verify(const Config& cfg) {
  auto sys = load_system(cfg);
  auto opts = make_options(cfg);
  auto sol = obtain_solution(cfg, sys.get(), opts.get());
  char* text = nullptr;
  crl_status status = crl_verify_report(sys.get(), sol.get(), opts.get(), cfg.format.c_str(), &text);
  Owned<char> owned(text);
  if (text) emit(cfg, text);
  if (status == CRL_VERIFY_FAILED) {
    std::cerr << "error: " << crl_last_error() << "\n";
    return CRL_VERIFY_FAILED;
  }
  check(status);
  return 0;
}

int run_eval(const Config& cfg) {
  auto sys = load_system(cfg);
  auto opts = make_options(cfg);
  auto sol = obtain_solution(cfg, sys.get(), opts.get());
  char* text = nullptr;
  check(crl_eval_report(sys.get(), sol.get(), cfg.step, cfg.z0.c_str(), cfg.format.c_str(), &text), "eval");
  Owned<char> owned(text);
  emit(cfg, text);
  return 0;
}

int run_transform(const Config& cfg) {
  auto sys = load_system(cfg);
  auto opts = make_options(cfg);
  char* text = nullptr;
  check(crl_transform_report(sys.get(), opts.get(), cfg.format.c_str(), &text));
  Owned<char> owned(text);
  emit(cfg, text);
  return 0;
}

void add_common(CLI::App* cmd, Config& cfg) {
  cmd->add_option("input", cfg.input, "recurrence file (.rec), or - for stdin")->required();
  cmd->add_option("--order,-N", cfg.order, "truncation degree N (default 6, or CARLEMAN_DEFAULT_ORDER)")
      ->check(CLI::Range(1U, 1000U));
  cmd->add_option("--mode", cfg.mode, "arithmetic mode")->check(CLI::IsMember({"exact", "float"}));
  cmd->add_option("--shift", cfg.shift, "auto, none, or comma-separated fixed point");
  cmd->add_option("--matrix-a", cfg.matrix_a, "linear transform A as JSON rows or a JSON file path");
  cmd->add_option("--format", cfg.format, "output format")->check(CLI::IsMember({"text", "json"}));
  cmd->add_option("--seed", cfg.seed, "seed for the float fixed-point search");
  cmd->add_option("--output,-o", cfg.output, "write the result to this file");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form solutions of polynomial recurrences via truncated Carleman linearization"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(crl_version()));
  Config cfg;

  auto* solve = app.add_subcommand("solve", "print the closed-form solution");
  add_common(solve, cfg);

  auto* matrix = app.add_subcommand("matrix", "print the truncated transition matrix of the transformed system");
  add_common(matrix, cfg);

  auto* verify = app.add_subcommand("verify", "check closed-form coefficients against symbolic iteration");
  add_common(verify, cfg);
  verify->add_option("--max-power", cfg.max_power, "check steps i = 0..I")->check(CLI::Range(0U, 1000U));
  verify->add_option("--tolerance", cfg.tolerance, "relative tolerance in float mode");
  verify->add_option("--solution", cfg.solution, "verify this solution JSON instead of solving");

  auto* eval = app.add_subcommand("eval", "compare direct iteration with the closed form at one step");
  add_common(eval, cfg);
  eval->add_option("--step,-i", cfg.step, "step index i")->required();
  eval->add_option("--z0", cfg.z0, "initial values u_0..u_{n-1}, comma-separated")->required();
  eval->add_option("--solution", cfg.solution, "use this solution JSON instead of solving");

  auto* transform = app.add_subcommand("transform", "show fixed points, admissibility and the chosen transform");
  add_common(transform, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return CRL_USAGE_ERROR;
  }

  try {
    if (solve->parsed()) return run_solve(cfg);
    if (matrix->parsed()) return run_matrix(cfg);
    if (verify->parsed()) return run_verify(cfg);
    if (eval->parsed()) return run_eval(cfg);
    if (transform->parsed()) return run_transform(cfg);
  } catch (const Failure& f) {
    return f.code();
  }
  return CRL_USAGE_ERROR;
}
