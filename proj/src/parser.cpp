#include "carleman/parser.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <optional>

namespace carleman {

namespace {

enum class Tok {
  Ident,
  Number,  // digits, or digits "." digits
  LBracket,
  RBracket,
  LParen,
  RParen,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  Equals,
  Comma,
  Colon,
  Newline,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

const char* tok_name(Tok t) {
  switch (t) {
    case Tok::Ident: return "identifier";
    case Tok::Number: return "number";
    case Tok::LBracket: return "'['";
    case Tok::RBracket: return "']'";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Plus: return "'+'";
    case Tok::Minus: return "'-'";
    case Tok::Star: return "'*'";
    case Tok::Slash: return "'/'";
    case Tok::Caret: return "'^'";
    case Tok::Equals: return "'='";
    case Tok::Comma: return "','";
    case Tok::Colon: return "':'";
    case Tok::Newline: return "end of line";
    case Tok::End: return "end of input";
  }
  return "?";
}

bool is_ident_start(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_blanks();
      if (pos_ >= text_.size()) {
        out.push_back(make(Tok::End, pos_, pos_, line_, col_));
        return out;
      }
      const std::size_t start = pos_, line = line_, col = col_;
      const char c = text_[pos_];
      if (c == '\n') {
        advance(1);
        ++line_;
        col_ = 1;
        out.push_back(make(Tok::Newline, start, pos_, line, col));
        continue;
      }
      if (is_ident_start(c)) {
        while (pos_ < text_.size() && (is_ident_start(text_[pos_]) || is_digit(text_[pos_]))) advance(1);
        out.push_back(make(Tok::Ident, start, pos_, line, col));
        continue;
      }
      if (is_digit(c)) {
        while (pos_ < text_.size() && is_digit(text_[pos_])) advance(1);
        if (pos_ < text_.size() && text_[pos_] == '.') {
          advance(1);
          if (pos_ >= text_.size() || !is_digit(text_[pos_])) {
            throw Error(ErrorCode::Syntax, "expected digits after '.'", "parse", span(start, pos_, line, col));
          }
          while (pos_ < text_.size() && is_digit(text_[pos_])) advance(1);
        }
        out.push_back(make(Tok::Number, start, pos_, line, col));
        continue;
      }
      // U+2212 minus sign and U+00B7 middle dot
      if (text_.substr(pos_, 3) == "\xE2\x88\x92") {
        advance(3);
        out.push_back(make(Tok::Minus, start, pos_, line, col, "-"));
        continue;
      }
      if (text_.substr(pos_, 2) == "\xC2\xB7") {
        advance(2);
        out.push_back(make(Tok::Star, start, pos_, line, col, "*"));
        continue;
      }
      Tok kind;
      switch (c) {
        case '[': kind = Tok::LBracket; break;
        case ']': kind = Tok::RBracket; break;
        case '(': kind = Tok::LParen; break;
        case ')': kind = Tok::RParen; break;
        case '+': kind = Tok::Plus; break;
        case '-': kind = Tok::Minus; break;
        case '*': kind = Tok::Star; break;
        case '/': kind = Tok::Slash; break;
        case '^': kind = Tok::Caret; break;
        case '=': kind = Tok::Equals; break;
        case ',': kind = Tok::Comma; break;
        case ':': kind = Tok::Colon; break;
        default: {
          std::size_t len = utf8_length(static_cast<unsigned char>(c));
          std::size_t end = std::min(text_.size(), pos_ + len);
          throw Error(ErrorCode::Syntax, "unexpected character '" + std::string(text_.substr(pos_, end - pos_)) + "'",
                      "parse", span(start, end, line, col));
        }
      }
      advance(1);
      out.push_back(make(kind, start, pos_, line, col));
    }
  }

 private:
  static std::size_t utf8_length(unsigned char lead) {
    if (lead >= 0xF0) return 4;
    if (lead >= 0xE0) return 3;
    if (lead >= 0xC0) return 2;
    return 1;
  }

  void advance(std::size_t bytes) {
    pos_ += bytes;
    ++col_;
  }

  void skip_blanks() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '\r') {
        advance(1);
      } else if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  static SourceSpan span(std::size_t start, std::size_t end, std::size_t line, std::size_t col) {
    return SourceSpan{start, end, line, col};
  }

  Token make(Tok kind, std::size_t start, std::size_t end, std::size_t line, std::size_t col,
             std::string text = {}) const {
    Token t;
    t.kind = kind;
    t.text = text.empty() ? std::string(text_.substr(start, end - start)) : std::move(text);
    t.span = span(start, end, line, col);
    return t;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

SourceSpan join(const SourceSpan& a, const SourceSpan& b) {
  SourceSpan s = a;
  s.end = std::max(a.end, b.end);
  return s;
}

constexpr unsigned kMaxExponent = 10000;

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text), tokens_(Lexer(text).run()) {}

  RecurrenceAst run() {
    RecurrenceAst ast;
    skip_newlines();
    parse_header(ast);
    std::vector<std::optional<Equation>> slots(ast.variables.size());
    while (true) {
      skip_newlines();
      if (peek().kind == Tok::End) break;
      Equation eq = parse_equation(ast);
      if (slots[eq.variable]) {
        throw Error(ErrorCode::DuplicateEquation,
                    "second equation for '" + ast.variables[eq.variable] + "'", "parse", eq.span);
      }
      slots[eq.variable] = std::move(eq);
    }
    for (std::size_t v = 0; v < slots.size(); ++v) {
      if (!slots[v]) {
        throw Error(ErrorCode::MissingEquation, "no equation for declared variable '" + ast.variables[v] + "'",
                    "parse", peek().span);
      }
      ast.equations.push_back(std::move(*slots[v]));
    }
    ast.depth = std::max<std::size_t>(1, std::max(max_lag_, declared_depth_));
    return ast;
  }

 private:
  const Token& peek(std::size_t ahead = 0) {
    std::size_t i = pos_;
    for (std::size_t n = 0;; ++i) {
      if (tokens_[i].kind == Tok::End) return tokens_[i];
      if (paren_depth_ > 0 && tokens_[i].kind == Tok::Newline) continue;
      if (n == ahead) return tokens_[i];
      ++n;
    }
  }

  Token take() {
    while (paren_depth_ > 0 && tokens_[pos_].kind == Tok::Newline) ++pos_;
    Token t = tokens_[pos_];
    if (t.kind != Tok::End) ++pos_;
    return t;
  }

  Token expect(Tok kind, const char* what) {
    const Token& t = peek();
    if (t.kind != kind) {
      throw Error(ErrorCode::Syntax, std::string("expected ") + what + ", found " + describe(t), "parse", t.span);
    }
    return take();
  }

  static std::string describe(const Token& t) {
    if (t.kind == Tok::Ident || t.kind == Tok::Number) return std::string(tok_name(t.kind)) + " '" + t.text + "'";
    return tok_name(t.kind);
  }

  void skip_newlines() {
    while (tokens_[pos_].kind == Tok::Newline) ++pos_;
  }

  void end_of_line(const char* context) {
    const Token& t = peek();
    if (t.kind == Tok::Newline) {
      take();
      return;
    }
    if (t.kind == Tok::End) return;
    throw Error(ErrorCode::Syntax, std::string("expected end of line after ") + context + ", found " + describe(t),
                "parse", t.span);
  }

  void parse_header(RecurrenceAst& ast) {
    Token kw = peek();
    if (kw.kind != Tok::Ident || kw.text != "vars") {
      throw Error(ErrorCode::Syntax, "input must start with 'vars:'", "parse", kw.span);
    }
    take();
    expect(Tok::Colon, "':' after 'vars'");
    while (true) {
      Token name = expect(Tok::Ident, "variable name");
      if (std::find(ast.variables.begin(), ast.variables.end(), name.text) != ast.variables.end()) {
        throw Error(ErrorCode::Syntax, "variable '" + name.text + "' declared twice", "parse", name.span);
      }
      ast.variables.push_back(name.text);
      ast.variable_spans.push_back(name.span);
      if (peek().kind != Tok::Comma) break;
      take();
    }
    end_of_line("variable list");
    // optional "depth: n" line, emitted by the printer when the declared
    // depth exceeds the largest lag actually referenced
    skip_newlines();
    if (peek().kind == Tok::Ident && peek().text == "depth" && peek(1).kind == Tok::Colon) {
      take();
      take();
      Token n = expect(Tok::Number, "depth value");
      declared_depth_ = parse_uint(n, ErrorCode::Syntax, "depth must be a positive integer");
      if (declared_depth_ == 0) throw Error(ErrorCode::Syntax, "depth must be a positive integer", "parse", n.span);
      end_of_line("depth");
    }
  }

  unsigned parse_uint(const Token& t, ErrorCode code, const std::string& message) {
    if (t.kind != Tok::Number || t.text.find('.') != std::string::npos) {
      throw Error(code, message, "parse", t.span);
    }
    unsigned v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc() || ptr != t.text.data() + t.text.size() || v > kMaxExponent) {
      throw Error(ErrorCode::SizeLimit, "integer '" + t.text + "' too large (limit " + std::to_string(kMaxExponent) + ")",
                  "parse", t.span);
    }
    return v;
  }

  std::size_t lookup(const RecurrenceAst& ast, const Token& name) {
    auto it = std::find(ast.variables.begin(), ast.variables.end(), name.text);
    if (it == ast.variables.end()) {
      throw Error(ErrorCode::UndeclaredVariable, "undeclared variable '" + name.text + "'", "parse", name.span);
    }
    return static_cast<std::size_t>(it - ast.variables.begin());
  }

  Equation parse_equation(const RecurrenceAst& ast) {
    Token name = expect(Tok::Ident, "equation target");
    Equation eq;
    eq.variable = lookup(ast, name);
    expect(Tok::LBracket, "'[' after equation target");
    Token idx = expect(Tok::Ident, "index 'i'");
    if (idx.text != "i") throw Error(ErrorCode::Syntax, "index must be 'i'", "parse", idx.span);
    Token close = peek();
    if (close.kind != Tok::RBracket) {
      throw Error(ErrorCode::Syntax, "left-hand side must be " + name.text + "[i]", "parse", close.span);
    }
    take();
    eq.span = join(name.span, close.span);
    expect(Tok::Equals, "'='");
    eq.rhs = parse_expr(ast);
    end_of_line("equation");
    return eq;
  }

  std::unique_ptr<ExprNode> binary(ExprNode::Kind kind, std::unique_ptr<ExprNode> lhs, std::unique_ptr<ExprNode> rhs) {
    auto node = std::make_unique<ExprNode>();
    node->kind = kind;
    node->span = join(lhs->span, rhs->span);
    node->children.push_back(std::move(lhs));
    node->children.push_back(std::move(rhs));
    return node;
  }

  void skip_continuation() {
    // a binary operator at the end of a line continues the expression
    while (tokens_[pos_].kind == Tok::Newline) ++pos_;
  }

  std::unique_ptr<ExprNode> parse_expr(const RecurrenceAst& ast) {
    auto lhs = parse_term(ast);
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Tok op = take().kind;
      skip_continuation();
      auto rhs = parse_term(ast);
      lhs = binary(op == Tok::Plus ? ExprNode::Kind::Add : ExprNode::Kind::Sub, std::move(lhs), std::move(rhs));
    }
    return lhs;
  }

  std::unique_ptr<ExprNode> parse_term(const RecurrenceAst& ast) {
    auto lhs = parse_factor(ast);
    while (true) {
      const Token& t = peek();
      if (t.kind == Tok::Star) {
        take();
        skip_continuation();
        auto rhs = parse_factor(ast);
        lhs = binary(ExprNode::Kind::Mul, std::move(lhs), std::move(rhs));
      } else if (t.kind == Tok::Slash) {
        throw Error(ErrorCode::NonPolynomial,
                    "division is only allowed between two integer literals (non-polynomial construct)", "parse",
                    join(lhs->span, t.span));
      } else if (t.kind == Tok::Ident || t.kind == Tok::Number || t.kind == Tok::LParen) {
        throw Error(ErrorCode::Syntax, "implicit multiplication is not allowed; write '*'", "parse", t.span);
      } else {
        return lhs;
      }
    }
  }

  std::unique_ptr<ExprNode> parse_factor(const RecurrenceAst& ast) {
    const Token& t = peek();
    if (t.kind == Tok::Minus || t.kind == Tok::Plus) {
      Token sign = take();
      auto operand = parse_factor(ast);
      if (sign.kind == Tok::Plus) return operand;
      auto node = std::make_unique<ExprNode>();
      node->kind = ExprNode::Kind::Neg;
      node->span = join(sign.span, operand->span);
      node->children.push_back(std::move(operand));
      return node;
    }
    auto base = parse_base(ast);
    if (peek().kind != Tok::Caret) return base;
    Token caret = take();
    const Token& e = peek();
    if (e.kind != Tok::Number || e.text.find('.') != std::string::npos) {
      throw Error(ErrorCode::NonIntegerExponent, "exponent must be a non-negative integer literal", "parse",
                  e.kind == Tok::End || e.kind == Tok::Newline ? caret.span : e.span);
    }
    if (peek(1).kind == Tok::Slash) {
      throw Error(ErrorCode::NonIntegerExponent, "exponent must be a non-negative integer literal", "parse",
                  join(e.span, peek(1).span));
    }
    Token et = take();
    auto node = std::make_unique<ExprNode>();
    node->kind = ExprNode::Kind::Pow;
    node->exponent = parse_uint(et, ErrorCode::NonIntegerExponent, "exponent must be a non-negative integer literal");
    node->span = join(base->span, et.span);
    node->children.push_back(std::move(base));
    if (peek().kind == Tok::Caret) {
      throw Error(ErrorCode::Syntax, "chained '^' is ambiguous; add parentheses", "parse", peek().span);
    }
    return node;
  }

  std::unique_ptr<ExprNode> parse_base(const RecurrenceAst& ast) {
    Token t = peek();
    auto node = std::make_unique<ExprNode>();
    switch (t.kind) {
      case Tok::Number: {
        take();
        node->kind = ExprNode::Kind::Number;
        node->literal = t.text;
        node->span = t.span;
        if (peek().kind == Tok::Slash && t.text.find('.') == std::string::npos) {
          const Token& den = peek(1);
          if (den.kind == Tok::Number && den.text.find('.') == std::string::npos) {
            take();
            Token d = take();
            node->literal += "/" + d.text;
            node->span = join(t.span, d.span);
            if (std::all_of(d.text.begin(), d.text.end(), [](char c) { return c == '0'; })) {
              throw Error(ErrorCode::DivisionByZero, "zero denominator", "parse", node->span);
            }
          }
        }
        return node;
      }
      case Tok::Ident: {
        take();
        node->kind = ExprNode::Kind::Variable;
        node->variable = lookup(ast, t);
        expect(Tok::LBracket, "'[' after variable (write var[i-j])");
        Token idx = expect(Tok::Ident, "index 'i'");
        if (idx.text != "i") throw Error(ErrorCode::Syntax, "index must be 'i'", "parse", idx.span);
        const Token& op = peek();
        if (op.kind == Tok::RBracket) {
          throw Error(ErrorCode::InvalidLag, "lag must be at least 1: use " + t.text + "[i-1] or older",
                      "parse", join(t.span, op.span));
        }
        if (op.kind == Tok::Plus) {
          Token plus = take();
          throw Error(ErrorCode::InvalidLag, "negative lag: the right-hand side may only refer to the past",
                      "parse", join(t.span, peek().span.end > plus.span.end ? peek().span : plus.span));
        }
        expect(Tok::Minus, "'-' in lag");
        Token lag = peek();
        if (lag.kind != Tok::Number || lag.text.find('.') != std::string::npos) {
          throw Error(ErrorCode::InvalidLag, "lag must be a positive integer", "parse", lag.span);
        }
        take();
        unsigned j = parse_uint(lag, ErrorCode::InvalidLag, "lag must be a positive integer");
        Token close = expect(Tok::RBracket, "']'");
        if (j == 0) throw Error(ErrorCode::InvalidLag, "lag must be at least 1", "parse", join(t.span, close.span));
        node->lag = j;
        node->span = join(t.span, close.span);
        max_lag_ = std::max<std::size_t>(max_lag_, j);
        return node;
      }
      case Tok::LParen: {
        take();
        ++paren_depth_;
        auto inner = parse_expr(ast);
        const Token& close = peek();
        if (close.kind != Tok::RParen) {
          throw Error(ErrorCode::Syntax, "expected ')', found " + describe(close), "parse", close.span);
        }
        --paren_depth_;
        Token c = take();
        inner->span = join(t.span, c.span);
        return inner;
      }
      default:
        throw Error(ErrorCode::Syntax, "expected a number, variable or '(', found " + describe(t), "parse", t.span);
    }
  }

  std::string_view text_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  int paren_depth_ = 0;
  std::size_t max_lag_ = 0;
  std::size_t declared_depth_ = 0;
};

Poly lower_expr(const ExprNode& node, std::size_t k, std::size_t nvars, Mode mode) {
  switch (node.kind) {
    case ExprNode::Kind::Number: {
      try {
        return Poly::constant(nvars, Scalar::parse(node.literal, mode));
      } catch (const Error& e) {
        throw Error(e.code(), e.message(), "parse", node.span);
      }
    }
    case ExprNode::Kind::Variable:
      return Poly::variable(nvars, (node.lag - 1) * k + node.variable, mode);
    case ExprNode::Kind::Add:
      return poly_add(lower_expr(*node.children[0], k, nvars, mode), lower_expr(*node.children[1], k, nvars, mode));
    case ExprNode::Kind::Sub:
      return poly_sub(lower_expr(*node.children[0], k, nvars, mode), lower_expr(*node.children[1], k, nvars, mode));
    case ExprNode::Kind::Mul:
      return poly_mul_truncated(lower_expr(*node.children[0], k, nvars, mode),
                                lower_expr(*node.children[1], k, nvars, mode));
    case ExprNode::Kind::Pow:
      return poly_pow_truncated(lower_expr(*node.children[0], k, nvars, mode), node.exponent);
    case ExprNode::Kind::Neg:
      return poly_scale(lower_expr(*node.children[0], k, nvars, mode), Scalar::from_int(-1, mode));
  }
  return Poly(nvars, mode);
}

}  // namespace

RecurrenceAst parse(std::string_view text) { return Parser(text).run(); }

PolySystem lower(const RecurrenceAst& ast, Mode mode) {
  const std::size_t k = ast.variables.size();
  const std::size_t nvars = k * ast.depth;
  std::vector<Poly> eqs;
  eqs.reserve(k);
  for (const auto& eq : ast.equations) {
    Poly p = lower_expr(*eq.rhs, k, nvars, mode);
    if (mode == Mode::Float) {
      for (const auto& [m, c] : p.terms()) {
        if (!c.is_finite()) {
          throw Error(ErrorCode::NonFinite, "coefficient overflows double precision", "parse", eq.rhs->span);
        }
      }
    }
    eqs.push_back(std::move(p));
  }
  return make_system(std::move(eqs), ast.depth, ast.variables);
}

PolySystem parse_system(std::string_view text, Mode mode) { return lower(parse(text), mode); }

namespace {

std::string float_text(double v) {
  char buf[512];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc()) return format_double(v);
  return std::string(buf, ptr);
}

std::string variable_text(const PolySystem& s, std::size_t var) {
  const auto names = s.names.empty() ? default_names(s.k) : s.names;
  return names[var % s.k] + "[i-" + std::to_string(var / s.k + 1) + "]";
}

std::string monomial_text(const PolySystem& s, const Monomial& m) {
  std::string out;
  for (std::size_t v = 0; v < m.size(); ++v) {
    if (m.exponents[v] == 0) continue;
    if (!out.empty()) out += "*";
    out += variable_text(s, v);
    if (m.exponents[v] > 1) out += "^" + std::to_string(m.exponents[v]);
  }
  return out;
}

std::string rhs_text(const PolySystem& s, const Poly& p) {
  std::vector<std::pair<const Monomial*, const Scalar*>> terms;
  for (const auto& [m, c] : p.terms()) terms.emplace_back(&m, &c);
  std::stable_sort(terms.begin(), terms.end(),
                   [](const auto& a, const auto& b) { return a.first->degree() > b.first->degree(); });
  if (terms.empty()) return "0";
  std::string out;
  for (const auto& [m, c] : terms) {
    bool negative;
    std::string magnitude;
    bool is_unit;
    if (c->is_exact()) {
      negative = sgn(c->rational()) < 0;
      mpq_class a = abs(c->rational());
      magnitude = a.get_str();
      is_unit = a == 1;
    } else {
      auto z = c->to_complex();
      if (z.imag() != 0.0) {
        throw Error(ErrorCode::InvalidArgument, "complex coefficients have no text form in the recurrence format",
                    "print");
      }
      negative = std::signbit(z.real());
      magnitude = float_text(std::abs(z.real()));
      is_unit = std::abs(z.real()) == 1.0;
    }
    if (out.empty()) {
      if (negative) out += "-";
    } else {
      out += negative ? " - " : " + ";
    }
    if (m->is_constant()) {
      out += magnitude;
    } else {
      if (!is_unit) out += magnitude + "*";
      out += monomial_text(s, *m);
    }
  }
  return out;
}

std::size_t referenced_depth(const PolySystem& s) {
  std::size_t depth = 1;
  for (const auto& f : s.equations) {
    for (const auto& [m, c] : f.terms()) {
      for (std::size_t v = 0; v < m.size(); ++v) {
        if (m.exponents[v] > 0) depth = std::max(depth, v / s.k + 1);
      }
    }
  }
  return depth;
}

}  // namespace

std::string pretty_print_equations(const PolySystem& system) {
  system.validate();
  const auto names = system.names.empty() ? default_names(system.k) : system.names;
  std::string out;
  for (std::size_t p = 0; p < system.k; ++p) {
    out += names[p] + "[i] = " + rhs_text(system, system.equations[p]) + "\n";
  }
  return out;
}

std::string pretty_print(const PolySystem& system) {
  system.validate();
  const auto names = system.names.empty() ? default_names(system.k) : system.names;
  std::string out = "vars: ";
  for (std::size_t p = 0; p < names.size(); ++p) {
    if (p > 0) out += ", ";
    out += names[p];
  }
  out += "\n";
  if (referenced_depth(system) < system.depth) out += "depth: " + std::to_string(system.depth) + "\n";
  return out + pretty_print_equations(system);
}

}  // namespace carleman
