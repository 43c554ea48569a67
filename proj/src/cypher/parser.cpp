// SPDX-License-Identifier: Apache-2.0
#include "pidgraph/cypher/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <set>

#include "pidgraph/errors.hpp"
#include "pidgraph/text.hpp"

namespace pidgraph::cypher {

namespace {

enum class Tok {
  ident,
  string,
  integer,
  decimal,
  lparen,
  rparen,
  lbracket,
  rbracket,
  lbrace,
  rbrace,
  colon,
  comma,
  dot,
  dotdot,
  minus,
  lt,
  gt,
  eq,
  neq,
  le,
  ge,
  star,
  pipe,
  semicolon,
  eof,
};

struct Token {
  Tok type = Tok::eof;
  std::string text;
  bool quoted = false;
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::string describe(const Token& t) {
  switch (t.type) {
    case Tok::eof: return "end of input";
    case Tok::string: return "string " + json_quote(t.text);
    default: return "'" + t.text + "'";
  }
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      Token t;
      t.line = line_;
      t.column = column_;
      t.begin = pos_;
      if (pos_ >= src_.size()) {
        t.type = Tok::eof;
        t.end = pos_;
        out.push_back(t);
        return out;
      }
      const char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) advance();
        t.type = Tok::ident;
        t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
      } else if (c == '`') {
        advance();
        std::string name;
        while (pos_ < src_.size() && src_[pos_] != '`') {
          name += src_[pos_];
          advance();
        }
        if (pos_ >= src_.size()) fail(t, "unterminated quoted name", {"`"});
        advance();
        if (name.empty()) fail(t, "empty quoted name", {"name"});
        t.type = Tok::ident;
        t.text = name;
        t.quoted = true;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        number(t);
      } else if (c == '\'' || c == '"') {
        string(t, c);
      } else {
        punct(t);
      }
      t.end = pos_;
      out.push_back(std::move(t));
    }
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg, std::vector<std::string> expected) {
    throw QuerySyntaxError("query syntax error: " + msg, at.line, at.column, std::move(expected));
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_space() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        return;
      }
    }
  }

  void number(Token& t) {
    while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    bool decimal = false;
    if (pos_ + 1 < src_.size() && src_[pos_] == '.' && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
      decimal = true;
      advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        decimal = true;
        while (pos_ < look) advance();
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) advance();
      }
    }
    if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      fail(t, "malformed number", {"number"});
    }
    t.type = decimal ? Tok::decimal : Tok::integer;
    t.text = std::string(src_.substr(t.begin, pos_ - t.begin));
  }

  void string(Token& t, char quote) {
    advance();
    std::string value;
    while (true) {
      if (pos_ >= src_.size()) fail(t, "unterminated string literal", {std::string(1, quote)});
      const char c = src_[pos_];
      if (c == quote) {
        advance();
        break;
      }
      if (c == '\\') {
        advance();
        if (pos_ >= src_.size()) fail(t, "unterminated string literal", {std::string(1, quote)});
        const char e = src_[pos_];
        advance();
        switch (e) {
          case 'n': value += '\n'; break;
          case 't': value += '\t'; break;
          case 'r': value += '\r'; break;
          case '\\': value += '\\'; break;
          case '\'': value += '\''; break;
          case '"': value += '"'; break;
          default: fail(t, std::string("unknown escape '\\") + e + "'", {"escape sequence"});
        }
        continue;
      }
      value += c;
      advance();
    }
    t.type = Tok::string;
    t.text = value;
  }

  void punct(Token& t) {
    const char c = src_[pos_];
    const char n = pos_ + 1 < src_.size() ? src_[pos_ + 1] : '\0';
    auto one = [&](Tok type) {
      t.type = type;
      t.text = std::string(1, c);
      advance();
    };
    auto two = [&](Tok type) {
      t.type = type;
      t.text = std::string(src_.substr(pos_, 2));
      advance();
      advance();
    };
    switch (c) {
      case '(': one(Tok::lparen); break;
      case ')': one(Tok::rparen); break;
      case '[': one(Tok::lbracket); break;
      case ']': one(Tok::rbracket); break;
      case '{': one(Tok::lbrace); break;
      case '}': one(Tok::rbrace); break;
      case ':': one(Tok::colon); break;
      case ',': one(Tok::comma); break;
      case ';': one(Tok::semicolon); break;
      case '|': one(Tok::pipe); break;
      case '*': one(Tok::star); break;
      case '-': one(Tok::minus); break;
      case '=': one(Tok::eq); break;
      case '.': n == '.' ? two(Tok::dotdot) : one(Tok::dot); break;
      case '<':
        if (n == '>') two(Tok::neq);
        else if (n == '=') two(Tok::le);
        else one(Tok::lt);
        break;
      case '>': n == '=' ? two(Tok::ge) : one(Tok::gt); break;
      case '!':
        if (n == '=') {
          two(Tok::neq);
          break;
        }
        [[fallthrough]];
      default: fail(t, "unexpected character '" + std::string(1, c) + "'", {});
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

constexpr std::size_t kMaxDepth = 64;

enum class VarKind { node, relationship, relationship_list };

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> tokens) : src_(src), tokens_(std::move(tokens)) {}

  Query run() {
    Query q;
    if (!keyword_at("MATCH")) fail_expected({"MATCH"});
    while (accept_keyword("MATCH")) {
      q.matches.push_back(match_clause());
      bind_clause(q.matches.back(), q.matches.size() - 1);
    }
    if (!accept_keyword("RETURN")) {
      fail_expected(q.matches.back().where ? std::vector<std::string>{"MATCH", "RETURN"}
                                           : std::vector<std::string>{",", "MATCH", "WHERE", "RETURN"});
    }
    q.distinct = accept_keyword("DISTINCT");
    do {
      q.items.push_back(return_item());
    } while (accept(Tok::comma));
    if (accept_keyword("LIMIT")) {
      const auto& t = peek();
      if (t.type != Tok::integer) fail_expected({"integer"});
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc{} || ptr != t.text.data() + t.text.size() || v <= 0) {
        semantic(t, "LIMIT must be a positive integer");
      }
      q.limit = v;
      next();
    }
    accept(Tok::semicolon);
    if (peek().type != Tok::eof) {
      fail_expected(q.limit ? std::vector<std::string>{"end of input"}
                            : std::vector<std::string>{",", "AS", "LIMIT", "end of input"});
    }
    check_return(q);
    return q;
  }

 private:
  const Token& peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& next() {
    const auto& t = peek();
    if (pos_ < tokens_.size() - 1) ++pos_;
    last_end_ = t.end;
    return t;
  }
  bool accept(Tok type) {
    if (peek().type != type) return false;
    next();
    return true;
  }
  bool keyword_at(std::string_view kw, std::size_t ahead = 0) const {
    const auto& t = peek(ahead);
    if (t.type != Tok::ident || t.quoted || t.text.size() != kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (std::toupper(static_cast<unsigned char>(t.text[i])) != kw[i]) return false;
    }
    return true;
  }
  bool accept_keyword(std::string_view kw) {
    if (!keyword_at(kw)) return false;
    next();
    return true;
  }

  [[noreturn]] void fail_expected(std::vector<std::string> expected) const {
    const auto& t = peek();
    std::string msg = "unexpected " + describe(t);
    if (!expected.empty()) msg += ", expected " + join(expected, " or ");
    throw QuerySyntaxError("query syntax error: " + msg, t.line, t.column, std::move(expected));
  }
  void expect(Tok type, const std::string& what) {
    if (!accept(type)) fail_expected({what});
  }
  [[noreturn]] void semantic(const Token& at, const std::string& msg) const {
    throw PositionedError(ErrorKind::query_semantic, "query error: " + msg, at.line, at.column);
  }
  [[noreturn]] void semantic(const Expr& at, const std::string& msg) const {
    throw PositionedError(ErrorKind::query_semantic, "query error: " + msg, at.line, at.column);
  }

  static bool reserved(const std::string& upper) {
    static const std::set<std::string> words{"MATCH", "WHERE", "RETURN", "DISTINCT", "AS", "AND", "OR", "XOR",
                                             "NOT", "IS", "NULL", "TRUE", "FALSE", "IN", "CONTAINS", "STARTS",
                                             "ENDS", "WITH", "LIMIT"};
    return words.count(upper) != 0;
  }

  std::string name(const std::string& what) {
    const auto& t = peek();
    if (t.type != Tok::ident) fail_expected({what});
    std::string upper = t.text;
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (!t.quoted && reserved(upper)) fail_expected({what});
    return next().text;
  }

  void enter() {
    if (++depth_ > kMaxDepth) {
      const auto& t = peek();
      throw QuerySyntaxError("query syntax error: expression nested too deeply", t.line, t.column, {});
    }
  }

  MatchClause match_clause() {
    MatchClause m;
    do {
      m.patterns.push_back(path_pattern());
    } while (accept(Tok::comma));
    if (accept_keyword("WHERE")) m.where = expression();
    return m;
  }

  PathPattern path_pattern() {
    PathPattern p;
    p.nodes.push_back(node_pattern());
    while (peek().type == Tok::minus || peek().type == Tok::lt) {
      p.rels.push_back(rel_pattern());
      p.nodes.push_back(node_pattern());
    }
    return p;
  }

  NodePattern node_pattern() {
    NodePattern n;
    expect(Tok::lparen, "(");
    if (peek().type == Tok::ident) n.variable = name("variable");
    while (accept(Tok::colon)) n.labels.push_back(name("label"));
    if (peek().type == Tok::lbrace) n.properties = property_map();
    if (!accept(Tok::rparen)) {
      std::vector<std::string> expected;
      if (!n.variable && n.labels.empty() && n.properties.empty()) expected.push_back("variable");
      if (n.properties.empty()) {
        expected.push_back(":");
        expected.push_back("{");
      }
      expected.push_back(")");
      fail_expected(expected);
    }
    return n;
  }

  RelPattern rel_pattern() {
    RelPattern r;
    const bool left = accept(Tok::lt);
    expect(Tok::minus, "-");
    if (accept(Tok::lbracket)) {
      if (peek().type == Tok::ident) r.variable = name("variable");
      if (accept(Tok::colon)) {
        r.types.push_back(name("relationship type"));
        while (accept(Tok::pipe)) {
          accept(Tok::colon);
          r.types.push_back(name("relationship type"));
        }
      }
      if (accept(Tok::star)) hop_range(r);
      if (peek().type == Tok::lbrace) r.properties = property_map();
      if (!accept(Tok::rbracket)) fail_expected({":", "*", "{", "]"});
    }
    expect(Tok::minus, "-");
    const bool right = accept(Tok::gt);
    r.direction = left == right ? RelDirection::any : (right ? RelDirection::out : RelDirection::in);
    return r;
  }

  std::size_t hop_bound() {
    const auto& t = next();
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{} || ptr != t.text.data() + t.text.size()) semantic(t, "hop bound out of range");
    return v;
  }

  void hop_range(RelPattern& r) {
    r.variable_length = true;
    const auto& start = peek();
    if (peek().type == Tok::integer) {
      r.min_hops = hop_bound();
      if (accept(Tok::dotdot)) {
        if (peek().type == Tok::integer) r.max_hops = hop_bound();
      } else {
        r.max_hops = r.min_hops;
      }
    } else if (accept(Tok::dotdot)) {
      if (peek().type != Tok::integer) fail_expected({"integer"});
      r.max_hops = hop_bound();
    }
    if (r.max_hops && *r.max_hops < r.min_hops) semantic(start, "hop range minimum exceeds maximum");
  }

  std::vector<std::pair<std::string, Expr>> property_map() {
    std::vector<std::pair<std::string, Expr>> props;
    expect(Tok::lbrace, "{");
    if (accept(Tok::rbrace)) return props;
    do {
      auto key = name("property key");
      expect(Tok::colon, ":");
      auto value = literal_value();
      for (const auto& [k, v] : props) {
        if (k == key) semantic(peek(), "duplicate property key '" + key + "'");
      }
      props.emplace_back(std::move(key), std::move(value));
    } while (accept(Tok::comma));
    expect(Tok::rbrace, "}");
    return props;
  }

  Expr make(ExprKind kind, const Token& at) {
    Expr e;
    e.kind = kind;
    e.line = at.line;
    e.column = at.column;
    return e;
  }

  Expr number_literal(const Token& t, bool negative) {
    Expr e = make(ExprKind::literal, t);
    const std::string text = (negative ? "-" : "") + t.text;
    if (t.type == Tok::integer) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size()) semantic(t, "integer literal out of range");
      e.value = PropertyValue(v);
    } else {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(v)) {
        semantic(t, "number literal out of range");
      }
      e.value = PropertyValue(v);
    }
    return e;
  }

  Expr literal_value() {
    enter();
    const auto& t = peek();
    Expr e;
    if (t.type == Tok::string) {
      e = make(ExprKind::literal, t);
      e.value = PropertyValue(next().text);
    } else if (t.type == Tok::integer || t.type == Tok::decimal) {
      e = number_literal(next(), false);
    } else if (t.type == Tok::minus && (peek(1).type == Tok::integer || peek(1).type == Tok::decimal)) {
      next();
      e = number_literal(next(), true);
    } else if (keyword_at("TRUE") || keyword_at("FALSE")) {
      e = make(ExprKind::literal, t);
      e.value = PropertyValue(keyword_at("TRUE"));
      next();
    } else if (keyword_at("NULL")) {
      e = make(ExprKind::null_literal, t);
      next();
    } else if (t.type == Tok::lbracket) {
      e = make(ExprKind::list, t);
      next();
      if (!accept(Tok::rbracket)) {
        do {
          e.children.push_back(literal_value());
        } while (accept(Tok::comma));
        expect(Tok::rbracket, "]");
      }
    } else {
      fail_expected({"literal"});
    }
    --depth_;
    return e;
  }

  Expr expression() {
    enter();
    auto e = or_expr();
    --depth_;
    return e;
  }

  Expr binary_chain(ExprKind kind, const char* kw, Expr (Parser::*operand)()) {
    Expr left = (this->*operand)();
    while (keyword_at(kw)) {
      const auto& t = next();
      Expr e = make(kind, t);
      e.children.push_back(std::move(left));
      e.children.push_back((this->*operand)());
      left = std::move(e);
    }
    return left;
  }

  Expr or_expr() { return binary_chain(ExprKind::logical_or, "OR", &Parser::xor_expr); }
  Expr xor_expr() { return binary_chain(ExprKind::logical_xor, "XOR", &Parser::and_expr); }
  Expr and_expr() { return binary_chain(ExprKind::logical_and, "AND", &Parser::not_expr); }

  Expr not_expr() {
    if (keyword_at("NOT")) {
      const auto& t = next();
      enter();
      Expr e = make(ExprKind::logical_not, t);
      e.children.push_back(not_expr());
      --depth_;
      return e;
    }
    return comparison();
  }

  Expr comparison() {
    Expr left = postfix();
    const auto& t = peek();
    static const std::map<Tok, std::string> ops{{Tok::eq, "="}, {Tok::neq, "<>"}, {Tok::lt, "<"},
                                                {Tok::gt, ">"}, {Tok::le, "<="}, {Tok::ge, ">="}};
    if (auto it = ops.find(t.type); it != ops.end()) {
      next();
      Expr e = make(ExprKind::compare, t);
      e.op = it->second;
      e.children.push_back(std::move(left));
      e.children.push_back(postfix());
      return e;
    }
    if (keyword_at("IS")) {
      next();
      Expr e = make(ExprKind::is_null, t);
      e.negated = accept_keyword("NOT");
      if (!accept_keyword("NULL")) fail_expected(e.negated ? std::vector<std::string>{"NULL"} : std::vector<std::string>{"NOT", "NULL"});
      e.children.push_back(std::move(left));
      return e;
    }
    if (keyword_at("CONTAINS") || keyword_at("STARTS") || keyword_at("ENDS")) {
      Expr e = make(ExprKind::string_match, t);
      if (accept_keyword("CONTAINS")) {
        e.op = "CONTAINS";
      } else {
        e.op = keyword_at("STARTS") ? "STARTS WITH" : "ENDS WITH";
        next();
        if (!accept_keyword("WITH")) fail_expected({"WITH"});
      }
      e.children.push_back(std::move(left));
      e.children.push_back(postfix());
      return e;
    }
    if (keyword_at("IN")) {
      next();
      Expr e = make(ExprKind::in_list, t);
      e.children.push_back(std::move(left));
      e.children.push_back(postfix());
      return e;
    }
    return left;
  }

  Expr postfix() {
    Expr e = atom();
    while (peek().type == Tok::dot) {
      const auto& t = next();
      Expr p = make(ExprKind::property, t);
      p.name = name("property key");
      p.children.push_back(std::move(e));
      e = std::move(p);
    }
    if (peek().type == Tok::colon) {
      const auto& t = peek();
      if (e.kind != ExprKind::variable) fail_expected({"operator"});
      Expr l = make(ExprKind::label_test, t);
      while (accept(Tok::colon)) l.labels.push_back(name("label"));
      l.children.push_back(std::move(e));
      e = std::move(l);
    }
    return e;
  }

  Expr atom() {
    enter();
    const auto& t = peek();
    Expr e;
    if (t.type == Tok::string || t.type == Tok::integer || t.type == Tok::decimal || keyword_at("TRUE") ||
        keyword_at("FALSE") || keyword_at("NULL") ||
        (t.type == Tok::minus && (peek(1).type == Tok::integer || peek(1).type == Tok::decimal))) {
      e = literal_value();
    } else if (t.type == Tok::lbracket) {
      e = make(ExprKind::list, t);
      next();
      if (!accept(Tok::rbracket)) {
        do {
          e.children.push_back(expression());
        } while (accept(Tok::comma));
        expect(Tok::rbracket, "]");
      }
    } else if (t.type == Tok::lparen) {
      next();
      e = expression();
      expect(Tok::rparen, ")");
    } else if (t.type == Tok::ident && peek(1).type == Tok::lparen && !t.quoted) {
      e = function_call();
    } else if (t.type == Tok::ident) {
      e = make(ExprKind::variable, t);
      e.name = name("expression");
    } else {
      fail_expected({"expression"});
    }
    --depth_;
    return e;
  }

  Expr function_call() {
    const auto& t = next();
    const std::string fname = t.text;
    next();  // '('
    if (to_lower(fname) == "count" && peek().type == Tok::star) {
      next();
      expect(Tok::rparen, ")");
      return make(ExprKind::count_star, t);
    }
    Expr e = make(ExprKind::function, t);
    e.name = fname;
    e.distinct = accept_keyword("DISTINCT");
    if (!accept(Tok::rparen)) {
      do {
        e.children.push_back(expression());
      } while (accept(Tok::comma));
      expect(Tok::rparen, ")");
    }
    return e;
  }

  ReturnItem return_item() {
    ReturnItem item;
    const auto begin = peek().begin;
    item.expr = expression();
    item.column = std::string(trim(src_.substr(begin, last_end_ - begin)));
    if (accept_keyword("AS")) {
      item.column = name("alias");
      item.aliased = true;
    }
    return item;
  }

  // Semantic checks.

  void bind(const std::optional<std::string>& var, VarKind kind, const Token& at) {
    if (!var) return;
    auto [it, inserted] = vars_.emplace(*var, kind);
    if (inserted) return;
    if (kind != VarKind::node || it->second != VarKind::node) {
      semantic(at, "variable '" + *var + "' is bound more than once or with different kinds");
    }
  }

  void bind_clause(const MatchClause& m, std::size_t) {
    const auto& at = peek();
    for (const auto& p : m.patterns) {
      for (std::size_t i = 0; i < p.nodes.size(); ++i) {
        bind(p.nodes[i].variable, VarKind::node, at);
        if (i < p.rels.size()) {
          const auto& r = p.rels[i];
          bind(r.variable, r.variable_length ? VarKind::relationship_list : VarKind::relationship, at);
        }
      }
    }
    if (m.where) {
      check_expr(*m.where);
      if (m.where->is_aggregate()) semantic(*m.where, "aggregate functions are not allowed in WHERE");
    }
  }

  void check_expr(const Expr& e) {
    switch (e.kind) {
      case ExprKind::variable:
        if (!vars_.count(e.name)) semantic(e, "variable '" + e.name + "' is not bound by MATCH");
        break;
      case ExprKind::label_test:
        check_expr(e.children[0]);
        if (vars_.at(e.children[0].name) != VarKind::node) {
          semantic(e, "label test on non-node variable '" + e.children[0].name + "'");
        }
        return;
      case ExprKind::function: {
        static const std::map<std::string, std::size_t> arity{{"tolower", 1}, {"toupper", 1}, {"labels", 1},
                                                              {"type", 1},    {"id", 1},      {"elementid", 1},
                                                              {"size", 1},    {"count", 1},   {"tostring", 1}};
        const auto key = to_lower(e.name);
        auto it = arity.find(key);
        if (it == arity.end()) semantic(e, "unknown function '" + e.name + "'");
        if (e.children.size() != it->second) semantic(e, "function '" + e.name + "' takes " + std::to_string(it->second) + " argument");
        if (e.distinct && key != "count") semantic(e, "DISTINCT is only valid inside count()");
        if (key == "count" && e.children[0].is_aggregate()) semantic(e, "nested aggregate");
        break;
      }
      default: break;
    }
    for (const auto& c : e.children) check_expr(c);
  }

  void check_return(const Query& q) {
    bool any_aggregate = false;
    for (const auto& item : q.items) {
      check_expr(item.expr);
      if (item.expr.is_aggregate()) {
        any_aggregate = true;
        const bool top = item.expr.kind == ExprKind::count_star ||
                         (item.expr.kind == ExprKind::function && to_lower(item.expr.name) == "count");
        if (!top) semantic(item.expr, "count() must be a whole return item");
      }
    }
    (void)any_aggregate;
    std::set<std::string> columns;
    for (const auto& item : q.items) {
      if (!columns.insert(item.column).second) semantic(item.expr, "duplicate return column '" + item.column + "'");
    }
  }

  std::string_view src_;
  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  std::size_t last_end_ = 0;
  std::size_t depth_ = 0;
  std::map<std::string, VarKind> vars_;
};

}  // namespace

Query parse_query(std::string_view text) {
  Lexer lexer(text);
  auto tokens = lexer.run();
  return Parser(text, std::move(tokens)).run();
}

}  // namespace pidgraph::cypher
