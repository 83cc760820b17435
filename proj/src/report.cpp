#include "carleman/report.hpp"

#include <array>
#include <json.hpp>
#include <sstream>

#include "carleman/parser.hpp"

namespace carleman {

using nlohmann::json;

Format parse_format(std::string_view text) {
  if (text == "text") return Format::Text;
  if (text == "json") return Format::Json;
  throw Error(ErrorCode::InvalidArgument, "unknown format '" + std::string(text) + "' (expected text or json)");
}

namespace {

json scalar_json(const Scalar& s) {
  if (s.is_exact()) return s.rational().get_str();
  auto z = s.to_complex();
  return json::array({z.real(), z.imag()});
}

Scalar scalar_from(const json& j, Mode mode) {
  if (j.is_string()) return Scalar::parse(j.get<std::string>(), mode);
  if (j.is_number()) {
    if (mode == Mode::Float) return Scalar(Scalar::Complex(j.get<double>(), 0.0));
    return Scalar::parse(j.dump(), mode);
  }
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    if (mode == Mode::Exact) {
      throw Error(ErrorCode::ModeMismatch, "float [re, im] value given for an exact-mode quantity");
    }
    return Scalar(Scalar::Complex(j[0].get<double>(), j[1].get<double>()));
  }
  throw Error(ErrorCode::InvalidArgument, "expected a scalar (\"p/q\", number or [re, im]), found " + j.dump());
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(scalar_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j, Mode mode) {
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::InvalidArgument, "expected a non-empty array of rows");
  std::vector<std::vector<Scalar>> rows;
  for (const auto& row : j) {
    if (!row.is_array()) throw Error(ErrorCode::InvalidArgument, "matrix rows must be arrays");
    std::vector<Scalar> r;
    for (const auto& v : row) r.push_back(scalar_from(v, mode));
    rows.push_back(std::move(r));
  }
  return Matrix::from_rows(rows);
}

json vector_json(const std::vector<Scalar>& v) {
  json out = json::array();
  for (const auto& s : v) out.push_back(scalar_json(s));
  return out;
}

json parse_json(std::string_view text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("malformed ") + what + " JSON: " + e.what());
  }
}

json variables_json(const std::vector<VariableSolution>& vars) {
  json out = json::array();
  for (const auto& v : vars) {
    json terms = json::array();
    for (const auto& [m, e] : v.terms) {
      json sum = json::array();
      for (const auto& [base, coeff] : e.terms()) sum.push_back({{"base", scalar_json(base)}, {"coeff", scalar_json(coeff)}});
      terms.push_back({{"monomial", m.exponents}, {"expsum", std::move(sum)}});
    }
    out.push_back({{"name", v.name}, {"offset", scalar_json(v.offset)}, {"terms", std::move(terms)}});
  }
  return out;
}

std::vector<VariableSolution> variables_from(const json& j, std::size_t k, Mode mode) {
  std::vector<VariableSolution> out;
  for (const auto& v : j) {
    VariableSolution var{v.at("name").get<std::string>(), scalar_from(v.at("offset"), mode), {}};
    for (const auto& t : v.at("terms")) {
      Monomial m(t.at("monomial").get<std::vector<unsigned>>());
      if (m.size() != k) throw Error(ErrorCode::Arity, "monomial exponent vector has the wrong length");
      std::vector<ExpSum::Term> terms;
      for (const auto& e : t.at("expsum")) terms.emplace_back(scalar_from(e.at("base"), mode), scalar_from(e.at("coeff"), mode));
      // keep the stored terms as they are: a solution file is data to check,
      // not to repair
      ExpSum sum = ExpSum::canonical(std::move(terms), 0.0);
      var.terms.emplace(std::move(m), std::move(sum));
    }
    out.push_back(std::move(var));
  }
  return out;
}

}  // namespace

std::string scalar_to_json(const Scalar& s) { return scalar_json(s).dump(); }

Scalar scalar_from_json(std::string_view text, Mode mode) { return scalar_from(parse_json(text, "scalar"), mode); }

Matrix matrix_from_json(std::string_view text, Mode mode) { return matrix_from(parse_json(text, "matrix"), mode); }

std::vector<Scalar> parse_scalar_list(std::string_view text, Mode mode) {
  std::vector<Scalar> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(pos, comma - pos);
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
    if (item.empty()) throw Error(ErrorCode::InvalidArgument, "empty entry in value list '" + std::string(text) + "'");
    out.push_back(Scalar::parse(item, mode));
    pos = comma + 1;
  }
  return out;
}

std::string solution_to_json(const ClosedFormSolution& sol) {
  json j;
  j["variables"] = variables_json(sol.variables);
  j["transform"] = {{"A", matrix_json(sol.transform.a())}, {"B", vector_json(sol.transform.b())}};
  j["order"] = sol.order;
  j["mode"] = mode_name(sol.mode);
  j["k"] = sol.k;
  j["depth"] = sol.depth;
  j["source_k"] = sol.source_k;
  j["transformed"] = variables_json(sol.transformed);
  return j.dump(2) + "\n";
}

ClosedFormSolution solution_from_json(std::string_view text) {
  json j = parse_json(text, "solution");
  try {
    ClosedFormSolution sol;
    sol.mode = parse_mode(j.at("mode").get<std::string>());
    sol.order = j.at("order").get<unsigned>();
    Matrix a = matrix_from(j.at("transform").at("A"), sol.mode);
    std::vector<Scalar> b;
    for (const auto& v : j.at("transform").at("B")) b.push_back(scalar_from(v, sol.mode));
    sol.transform = TransformParams(std::move(a), std::move(b));
    sol.k = j.contains("k") ? j.at("k").get<std::size_t>() : sol.transform.dimension();
    sol.depth = j.value("depth", std::size_t{1});
    sol.source_k = j.value("source_k", sol.k / sol.depth);
    sol.variables = variables_from(j.at("variables"), sol.k, sol.mode);
    if (j.contains("transformed")) {
      sol.transformed = variables_from(j.at("transformed"), sol.k, sol.mode);
    } else if (sol.transform.has_zero_shift()) {
      sol.transformed = sol.variables;
    }
    if (sol.variables.size() != sol.k) throw Error(ErrorCode::Arity, "solution variable count differs from k");
    return sol;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("solution JSON does not match the schema: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Text rendering

namespace {

std::string matrix_text(const Matrix& m) {
  std::string out = "[";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += r ? ", [" : "[";
    for (std::size_t c = 0; c < m.cols(); ++c) out += (c ? ", " : "") + m(r, c).str();
    out += "]";
  }
  return out + "]";
}

std::string vector_text(const std::vector<Scalar>& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i].str();
  return out + ")";
}

std::vector<std::string> names_of(const ClosedFormSolution& sol) {
  std::vector<std::string> names;
  for (const auto& v : sol.variables) names.push_back(v.name);
  return names;
}

void render_series(std::ostringstream& os, const std::vector<VariableSolution>& vars,
                   const std::vector<std::string>& names) {
  for (const auto& v : vars) {
    os << v.name << "[i]:\n";
    std::vector<std::pair<std::string, std::string>> lines;
    if (!v.offset.is_zero()) lines.emplace_back("offset", v.offset.str());
    for (const auto& [m, e] : v.terms) lines.emplace_back(initial_monomial_text(m, names), e.str());
    std::size_t width = 0;
    for (const auto& l : lines) width = std::max(width, l.first.size());
    for (const auto& [label, value] : lines) os << "  " << label << std::string(width - label.size(), ' ') << " : " << value << "\n";
  }
}

}  // namespace

std::string initial_monomial_text(const Monomial& m, const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (m.exponents[v] == 0) continue;
    if (!out.empty()) out += "*";
    out += (v < names.size() ? names[v] : "z" + std::to_string(v + 1)) + "[0]";
    if (m.exponents[v] > 1) out += "^" + std::to_string(m.exponents[v]);
  }
  return out.empty() ? "1" : out;
}

std::string render_solution(const ClosedFormSolution& sol, Format format) {
  if (format == Format::Json) return solution_to_json(sol);
  std::ostringstream os;
  os << "closed form (order " << sol.order << ", " << mode_name(sol.mode) << ")\n";
  if (sol.depth > 1) {
    os << "depth " << sol.depth << " reduced to " << sol.k << " variables; [0] values are the state at step "
       << sol.depth - 1 << " (lagged copies hold earlier steps)\n";
  }
  os << "transform: A = " << matrix_text(sol.transform.a()) << ", B = " << vector_text(sol.transform.b()) << "\n";
  render_series(os, sol.variables, names_of(sol));
  return os.str();
}

std::string render_matrix(const CarlemanMatrix& m, Format format) {
  const auto& e = m.entries;
  bool triangular = m.triangular();
  std::vector<Scalar> eig = e.diagonal();
  if (format == Format::Json) {
    json basis = json::array();
    for (const auto& mono : m.basis.monomials()) basis.push_back(mono.exponents);
    json j;
    j["k"] = m.basis.k();
    j["N"] = m.basis.order();
    j["basis"] = std::move(basis);
    j["rows"] = matrix_json(e);
    j["triangular"] = triangular;
    j["eigenvalues"] = triangular ? vector_json(eig) : json(nullptr);
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "transition matrix (k = " << m.basis.k() << ", N = " << m.basis.order() << ", size " << m.basis.size()
     << ")\nbasis:";
  std::vector<std::string> names;
  for (std::size_t v = 0; v < m.basis.k(); ++v) names.push_back("z" + std::to_string(v + 1));
  for (const auto& mono : m.basis.monomials()) {
    std::string t = initial_monomial_text(mono, names);
    // drop the [0] suffixes; basis monomials are not tied to a step
    std::string clean;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t.compare(i, 3, "[0]") == 0) {
        i += 2;
        continue;
      }
      clean += t[i];
    }
    os << " " << clean;
  }
  os << "\n";
  std::vector<std::vector<std::string>> cells(e.rows(), std::vector<std::string>(e.cols()));
  std::vector<std::size_t> width(e.cols(), 0);
  for (std::size_t r = 0; r < e.rows(); ++r)
    for (std::size_t c = 0; c < e.cols(); ++c) {
      cells[r][c] = e(r, c).str();
      width[c] = std::max(width[c], cells[r][c].size());
    }
  for (std::size_t r = 0; r < e.rows(); ++r) {
    os << " ";
    for (std::size_t c = 0; c < e.cols(); ++c) os << " " << std::string(width[c] - cells[r][c].size(), ' ') << cells[r][c];
    os << "\n";
  }
  os << "triangular: " << (triangular ? "yes" : "no") << "\n";
  if (triangular) os << "eigenvalues: " << vector_text(eig) << "\n";
  return os.str();
}

std::string render_verification(const VerificationReport& report, unsigned order, Format format) {
  if (format == Format::Json) {
    json steps = json::array();
    for (std::size_t i = 0; i < report.step_passed.size(); ++i) {
      steps.push_back({{"i", i}, {"checked", report.step_checked[i]}, {"pass", static_cast<bool>(report.step_passed[i])}});
    }
    json failures = json::array();
    for (const auto& f : report.failures) {
      failures.push_back({{"i", f.step},
                          {"variable", f.variable},
                          {"monomial", f.monomial.exponents},
                          {"expected", scalar_json(f.expected)},
                          {"actual", scalar_json(f.actual)},
                          {"discrepancy", f.discrepancy}});
    }
    json j;
    j["coordinates"] = report.coordinates;
    j["order"] = order;
    j["max_power"] = report.max_power;
    j["steps"] = std::move(steps);
    j["failures"] = std::move(failures);
    j["checked"] = report.checked;
    j["max_discrepancy"] = report.max_discrepancy;
    j["pass"] = report.passed();
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "verification against symbolic iteration (" << report.coordinates << " coordinates, degree <= " << order
     << ")\n";
  os << "   i  coefficients  status\n";
  for (std::size_t i = 0; i < report.step_passed.size(); ++i) {
    std::string n = std::to_string(report.step_checked[i]);
    std::string idx = std::to_string(i);
    os << std::string(4 - std::min<std::size_t>(4, idx.size()), ' ') << idx << "  "
       << std::string(12 - std::min<std::size_t>(12, n.size()), ' ') << n << "  "
       << (report.step_passed[i] ? "PASS" : "FAIL") << "\n";
  }
  constexpr std::size_t kShown = 20;
  for (std::size_t f = 0; f < report.failures.size() && f < kShown; ++f) {
    const auto& e = report.failures[f];
    os << "  mismatch i=" << e.step << " variable " << e.variable << " monomial [";
    for (std::size_t v = 0; v < e.monomial.size(); ++v) os << (v ? "," : "") << e.monomial.exponents[v];
    os << "]: expected " << e.expected.str() << ", got " << e.actual.str() << "\n";
  }
  if (report.failures.size() > kShown) os << "  ... " << report.failures.size() - kShown << " more mismatches\n";
  os << "max discrepancy: " << format_double(report.max_discrepancy) << "\n";
  os << "result: " << (report.passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string render_eval(unsigned step, const std::vector<std::string>& names, const std::vector<Scalar>& direct,
                        const std::vector<Scalar>& closed, Format format) {
  if (format == Format::Json) {
    json rows = json::array();
    for (std::size_t p = 0; p < direct.size(); ++p) {
      rows.push_back({{"name", names[p]},
                      {"direct", scalar_json(direct[p])},
                      {"closed_form", scalar_json(closed[p])},
                      {"difference", scalar_json(direct[p] - closed[p])}});
    }
    json j;
    j["i"] = step;
    j["values"] = std::move(rows);
    return j.dump(2) + "\n";
  }
  std::vector<std::array<std::string, 4>> rows{{"variable", "direct", "closed form", "difference"}};
  for (std::size_t p = 0; p < direct.size(); ++p) {
    rows.push_back({names[p], direct[p].str(), closed[p].str(), (direct[p] - closed[p]).str()});
  }
  std::array<std::size_t, 4> width{};
  for (const auto& r : rows)
    for (std::size_t c = 0; c < 4; ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream os;
  os << "i = " << step << "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 4; ++c) {
      os << r[c];
      if (c < 3) os << std::string(width[c] - r[c].size() + 2, ' ');
    }
    os << "\n";
  }
  return os.str();
}

namespace {

json admissibility_json(const CandidateReport& c) {
  json j;
  j["shift"] = vector_json(c.shift);
  j["pass"] = c.passed();
  if (c.error) {
    j["error"] = {{"code", code_name(c.error->code())}, {"stage", c.error->stage()}, {"message", c.error->message()}};
  }
  if (c.admissibility) {
    const auto& a = *c.admissibility;
    j["eigenvalues"] = vector_json(a.eigenvalues);
    j["reason"] = a.reason;
    if (a.root_of_unity) j["root_of_unity"] = *a.root_of_unity;
    if (a.two_variable_condition) j["two_variable_condition"] = *a.two_variable_condition;
    if (!a.heuristic_note.empty()) j["heuristic_note"] = a.heuristic_note;
  }
  return j;
}

}  // namespace

std::string render_transform(const PreparedSystem& prep, Format format) {
  std::string dsl = pretty_print(prep.transformed);
  if (format == Format::Json) {
    json cands = json::array();
    for (const auto& c : prep.candidates) cands.push_back(admissibility_json(c));
    json j;
    j["candidates"] = std::move(cands);
    j["chosen"] = prep.chosen;
    j["transform"] = {{"A", matrix_json(prep.transform.a())}, {"B", vector_json(prep.transform.b())}};
    j["identity"] = prep.transform.is_identity();
    j["system"] = dsl;
    return j.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "fixed-point candidates:\n";
  for (std::size_t i = 0; i < prep.candidates.size(); ++i) {
    const auto& c = prep.candidates[i];
    os << "  B = " << vector_text(c.shift) << ": " << (c.passed() ? "PASS" : "FAIL");
    if (c.admissibility) {
      const auto& a = *c.admissibility;
      os << "  eigenvalues " << vector_text(a.eigenvalues);
      if (!a.passed) os << "  " << a.reason;
      if (a.root_of_unity) os << "  root of unity: " << (*a.root_of_unity ? "yes" : "no");
      if (a.two_variable_condition) {
        os << "  two-variable condition: " << (*a.two_variable_condition ? "holds" : "fails") << " (heuristic)";
      }
    }
    if (c.error) os << "  " << c.error->stage() << ": " << c.error->message();
    os << "\n";
  }
  os << "chosen: B = " << vector_text(prep.transform.b()) << ", A = " << matrix_text(prep.transform.a());
  if (prep.transform.is_identity()) os << " (identity)";
  os << "\ntransformed system:\n" << dsl;
  return os.str();
}

}  // namespace carleman
