// SMT-LIB 2 subset: scripts with named assertions, term printing with
// let-sharing for shared subterms.

#ifndef WEQINTERP_SMTLIB_HPP
#define WEQINTERP_SMTLIB_HPP

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "weqinterp/terms.hpp"

namespace weqinterp {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(int line_, int col_, const std::string& expected)
      : std::runtime_error("parse error at " + std::to_string(line_) + ":" +
                           std::to_string(col_) + ": " + expected),
        line(line_), col(col_) {}
};

struct NamedAssertion {
  std::string name;
  TermId formula;
};

enum class CommandKind : uint8_t {
  SetLogic, SetOption, DeclareSort, DeclareFun, Assert, CheckSat, GetInterpolants, Exit,
};

struct Command {
  CommandKind kind;
  std::vector<std::vector<std::string>> groups;  // GetInterpolants only
};

struct Script {
  std::string logic;
  std::vector<NamedAssertion> assertions;
  std::vector<Command> commands;

  std::optional<size_t> assertion_index(const std::string& name) const {
    for (size_t i = 0; i < assertions.size(); ++i)
      if (assertions[i].name == name) return i;
    return std::nullopt;
  }
};

// Ordered groups of assertion names; 2 groups = binary (A,B).
struct Partitioning {
  std::vector<std::vector<size_t>> groups;  // assertion indices
};

namespace detail {

struct Token {
  enum Kind { LParen, RParen, Symbol, Keyword, String, End } kind;
  std::string text;
  int line, col;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    skip_ws();
    int l = line_, c = col_;
    if (pos_ >= text_.size()) return {Token::End, "", l, c};
    char ch = text_[pos_];
    if (ch == '(') { advance(); return {Token::LParen, "(", l, c}; }
    if (ch == ')') { advance(); return {Token::RParen, ")", l, c}; }
    if (ch == '"') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '"') { s += text_[pos_]; advance(); }
      if (pos_ >= text_.size()) throw ParseError(l, c, "unterminated string");
      advance();
      return {Token::String, s, l, c};
    }
    if (ch == '|') {
      advance();
      std::string s;
      while (pos_ < text_.size() && text_[pos_] != '|') { s += text_[pos_]; advance(); }
      if (pos_ >= text_.size()) throw ParseError(l, c, "unterminated quoted symbol");
      advance();
      return {Token::Symbol, s, l, c};
    }
    std::string s;
    bool keyword = ch == ':';
    while (pos_ < text_.size() && !is_delim(text_[pos_])) { s += text_[pos_]; advance(); }
    if (keyword) return {Token::Keyword, s, l, c};
    return {Token::Symbol, s, l, c};
  }

 private:
  static bool is_delim(char c) {
    return c == '(' || c == ')' || c == '"' || c == '|' || c == ';' ||
           c == ' ' || c == '\t' || c == '\n' || c == '\r';
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (text_[pos_] == '\n') { ++line_; col_ = 1; } else { ++col_; }
    ++pos_;
  }

  const std::string& text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

// S-expression tree; parsing terms off s-exprs keeps let scoping simple.
struct SExpr {
  bool atom;
  Token tok;                 // atom
  std::vector<SExpr> items;  // list
};

class SExprReader {
 public:
  explicit SExprReader(const std::string& text) : lex_(text) { cur_ = lex_.next(); }

  bool at_end() const { return cur_.kind == Token::End; }

  SExpr read() {
    if (cur_.kind == Token::End) throw ParseError(cur_.line, cur_.col, "unexpected end of input");
    if (cur_.kind == Token::RParen) throw ParseError(cur_.line, cur_.col, "unexpected ')'");
    if (cur_.kind == Token::LParen) {
      SExpr list{false, cur_, {}};
      cur_ = lex_.next();
      while (cur_.kind != Token::RParen) {
        if (cur_.kind == Token::End)
          throw ParseError(cur_.line, cur_.col, "expected ')'");
        list.items.push_back(read());
      }
      cur_ = lex_.next();
      return list;
    }
    SExpr a{true, cur_, {}};
    cur_ = lex_.next();
    return a;
  }

 private:
  Lexer lex_;
  Token cur_;
};

}  // namespace detail

class Parser {
 public:
  explicit Parser(Context& ctx) : ctx_(ctx) {}

  Script parse(const std::string& text) {
    detail::SExprReader reader(text);
    Script script;
    while (!reader.at_end()) {
      detail::SExpr e = reader.read();
      parse_command(e, script);
    }
    return script;
  }

  // Parses a single term, for interpolant files and tests.
  TermId parse_term_text(const std::string& text) {
    detail::SExprReader reader(text);
    detail::SExpr e = reader.read();
    std::vector<std::pair<std::string, TermId>> lets;
    return parse_term(e, lets);
  }

 private:
  using LetStack = std::vector<std::pair<std::string, TermId>>;

  [[noreturn]] void fail(const detail::SExpr& e, const std::string& msg) {
    throw ParseError(e.tok.line, e.tok.col, msg);
  }

  const std::string& sym(const detail::SExpr& e) {
    if (!e.atom || e.tok.kind != detail::Token::Symbol)
      fail(const_cast<detail::SExpr&>(e), "expected a symbol");
    return e.tok.text;
  }

  void parse_command(const detail::SExpr& e, Script& script) {
    if (e.atom || e.items.empty()) fail(e, "expected a command");
    const std::string& head = sym(e.items[0]);
    if (head == "set-logic") {
      script.logic = sym(e.items.at(1));
      script.commands.push_back({CommandKind::SetLogic, {}});
    } else if (head == "set-option" || head == "set-info") {
      script.commands.push_back({CommandKind::SetOption, {}});
    } else if (head == "declare-sort") {
      if (e.items.size() >= 3 && sym(e.items[2]) != "0")
        throw UnsupportedFeature("parameterized sorts are not supported");
      ctx_.declare_sort(sym(e.items.at(1)));
      script.commands.push_back({CommandKind::DeclareSort, {}});
    } else if (head == "declare-fun") {
      if (e.items.size() != 4) fail(e, "declare-fun expects (declare-fun name (sorts) sort)");
      std::vector<SortId> args;
      if (e.items[2].atom) fail(e.items[2], "expected an argument sort list");
      for (const auto& s : e.items[2].items) {
        SortId a = parse_sort(s);
        if (a == ctx_.bool_sort())
          throw UnsupportedFeature("Bool function arguments are not supported");
        args.push_back(a);
      }
      SortId ret = parse_sort(e.items[3]);
      if (!args.empty() && ctx_.sort(ret).kind == SortKind::Array)
        throw UnsupportedFeature("array-valued functions are not supported");
      ctx_.declare_fun(sym(e.items[1]), args, ret);
      script.commands.push_back({CommandKind::DeclareFun, {}});
    } else if (head == "declare-const") {
      if (e.items.size() != 3) fail(e, "declare-const expects (declare-const name sort)");
      ctx_.declare_fun(sym(e.items[1]), {}, parse_sort(e.items[2]));
      script.commands.push_back({CommandKind::DeclareFun, {}});
    } else if (head == "assert") {
      LetStack lets;
      std::string name;
      TermId f = parse_assert_body(e.items.at(1), lets, name);
      if (name.empty()) name = "." + std::to_string(script.assertions.size());
      for (const auto& a : script.assertions)
        if (a.name == name) fail(e, "duplicate assertion name " + name);
      script.assertions.push_back({name, f});
      script.commands.push_back({CommandKind::Assert, {}});
    } else if (head == "check-sat") {
      script.commands.push_back({CommandKind::CheckSat, {}});
    } else if (head == "get-interpolants") {
      Command cmd{CommandKind::GetInterpolants, {}};
      for (size_t i = 1; i < e.items.size(); ++i) {
        const detail::SExpr& g = e.items[i];
        std::vector<std::string> group;
        if (g.atom) {
          group.push_back(sym(g));
        } else {
          if (g.items.empty() || sym(g.items[0]) != "and")
            fail(g, "expected an assertion name or (and names...)");
          for (size_t k = 1; k < g.items.size(); ++k) group.push_back(sym(g.items[k]));
        }
        cmd.groups.push_back(std::move(group));
      }
      script.commands.push_back(std::move(cmd));
    } else if (head == "exit") {
      script.commands.push_back({CommandKind::Exit, {}});
    } else if (head == "push" || head == "pop" || head == "get-model" || head == "forall" ||
               head == "exists") {
      throw UnsupportedFeature("unsupported command: " + head);
    } else {
      fail(e, "unknown command " + head);
    }
  }

  TermId parse_assert_body(const detail::SExpr& e, LetStack& lets, std::string& name) {
    // (! phi :named n)
    if (!e.atom && !e.items.empty() && e.items[0].atom && e.items[0].tok.text == "!") {
      TermId f = parse_term(e.items.at(1), lets);
      for (size_t i = 2; i + 1 < e.items.size(); i += 2) {
        if (e.items[i].tok.kind == detail::Token::Keyword && e.items[i].tok.text == ":named")
          name = sym(e.items[i + 1]);
      }
      return f;
    }
    return parse_term(e, lets);
  }

  SortId parse_sort(const detail::SExpr& e) {
    if (e.atom) {
      const std::string& n = sym(e);
      if (n == "Bool") return ctx_.bool_sort();
      if (n == "Int" || n == "Real") throw UnsupportedFeature("arithmetic sorts are not supported");
      SortId s = ctx_.find_sort(n);
      if (s == kNoSort) fail(e, "undeclared sort " + n);
      return s;
    }
    if (e.items.size() == 3 && e.items[0].atom && sym(e.items[0]) == "Array") {
      SortId idx = parse_sort(e.items[1]);
      SortId elem = parse_sort(e.items[2]);
      if (ctx_.sort(idx).kind == SortKind::Array || ctx_.sort(elem).kind == SortKind::Array)
        throw UnsupportedFeature("nested array sorts are not supported");
      return ctx_.array_sort(idx, elem);
    }
    fail(e, "expected a sort");
  }

  TermId parse_term(const detail::SExpr& e, LetStack& lets) {
    if (e.atom) {
      const std::string& n = sym(e);
      for (auto it = lets.rbegin(); it != lets.rend(); ++it)
        if (it->first == n) return it->second;
      if (n == "true") return ctx_.mk_true();
      if (n == "false") return ctx_.mk_false();
      if (ctx_.has_fun(n)) {
        const FunDecl& d = ctx_.fun(ctx_.fun_id(n));
        if (!d.args.empty()) fail(e, n + " expects arguments");
        return ctx_.mk_app(ctx_.fun_id(n), {});
      }
      fail(e, "undeclared symbol " + n);
    }
    if (e.items.empty()) fail(e, "empty application");
    const std::string& head = sym(e.items[0]);
    if (head == "forall" || head == "exists")
      throw UnsupportedFeature("quantifiers are not supported");
    if (head == "let") {
      if (e.items.size() != 3 || e.items[1].atom) fail(e, "malformed let");
      size_t base = lets.size();
      std::vector<std::pair<std::string, TermId>> bound;
      for (const auto& b : e.items[1].items) {
        if (b.atom || b.items.size() != 2) fail(b, "malformed let binding");
        bound.emplace_back(sym(b.items[0]), parse_term(b.items[1], lets));
      }
      for (auto& b : bound) lets.push_back(std::move(b));
      TermId body = parse_term(e.items[2], lets);
      lets.resize(base);
      return body;
    }
    std::vector<TermId> args;
    for (size_t i = 1; i < e.items.size(); ++i) args.push_back(parse_term(e.items[i], lets));
    try {
      if (head == "not") { need(e, args, 1); return ctx_.mk_not(args[0]); }
      if (head == "and") return ctx_.mk_and(args);
      if (head == "or") return ctx_.mk_or(args);
      if (head == "=>") { need(e, args, 2); return ctx_.mk_implies(args[0], args[1]); }
      if (head == "=") {
        if (args.size() < 2) fail(e, "= expects at least 2 arguments");
        std::vector<TermId> conj;
        for (size_t i = 0; i + 1 < args.size(); ++i) conj.push_back(ctx_.mk_eq(args[i], args[i + 1]));
        return ctx_.mk_and(conj);
      }
      if (head == "distinct") {
        if (args.size() < 2) fail(e, "distinct expects at least 2 arguments");
        std::vector<TermId> conj;
        for (size_t i = 0; i < args.size(); ++i)
          for (size_t j = i + 1; j < args.size(); ++j) conj.push_back(ctx_.mk_neq(args[i], args[j]));
        return ctx_.mk_and(conj);
      }
      if (head == "select") { need(e, args, 2); return ctx_.mk_select(args[0], args[1]); }
      if (head == "store") { need(e, args, 3); return ctx_.mk_store(args[0], args[1], args[2]); }
      if (head == "diff") { need(e, args, 2); return ctx_.mk_diff(args[0], args[1]); }
      if (head == "ite" || head == "xor") throw UnsupportedFeature(head + " is not supported");
      if (ctx_.has_fun(head)) return ctx_.mk_app(ctx_.fun_id(head), args);
    } catch (const SortError& err) {
      throw ParseError(e.tok.line, e.tok.col, err.what());
    }
    fail(e, "undeclared symbol " + head);
  }

  void need(const detail::SExpr& e, const std::vector<TermId>& args, size_t n) {
    if (args.size() != n) fail(e, "wrong argument count");
  }

  Context& ctx_;
};

// Prints a term in SMT-LIB syntax; every subterm referenced more than once
// in the DAG is bound with a let.
class Printer {
 public:
  explicit Printer(const Context& ctx, bool allow_internal = false)
      : ctx_(ctx), allow_internal_(allow_internal) {}

  std::string print(TermId t) {
    std::unordered_map<TermId, int> refs;
    count_refs(t, refs);
    std::vector<TermId> shared;  // in first-visit (bottom-up-safe) order
    std::unordered_set<TermId> seen;
    order_shared(t, refs, shared, seen);

    names_.clear();
    int n = 0;
    for (TermId s : shared) names_[s] = ".cse" + std::to_string(n++);

    std::string body = print_node(t, /*use_names=*/true, t);
    std::string out;
    for (TermId s : shared) {
      out += "(let ((" + names_[s] + " ";
      // A binding may reference earlier bindings, never later ones.
      std::string def = print_node(s, /*use_names=*/true, s);
      out += def + ")) ";
    }
    out += body;
    out.append(shared.size(), ')');
    return out;
  }

 private:
  void count_refs(TermId t, std::unordered_map<TermId, int>& refs) {
    std::vector<TermId> stack{t};
    std::unordered_set<TermId> expanded;
    while (!stack.empty()) {
      TermId u = stack.back();
      stack.pop_back();
      if (!expanded.insert(u).second) continue;
      for (TermId c : ctx_.term(u).args) {
        ++refs[c];
        stack.push_back(c);
      }
    }
  }

  bool bindable(TermId t, const std::unordered_map<TermId, int>& refs) const {
    auto it = refs.find(t);
    return it != refs.end() && it->second >= 2 && !ctx_.term(t).args.empty();
  }

  // Children of a binding are emitted before it.
  void order_shared(TermId t, const std::unordered_map<TermId, int>& refs,
                    std::vector<TermId>& out, std::unordered_set<TermId>& seen) {
    if (!seen.insert(t).second) return;
    for (TermId c : ctx_.term(t).args) order_shared(c, refs, out, seen);
    if (bindable(t, refs)) out.push_back(t);
  }

  std::string print_node(TermId t, bool use_names, TermId root) {
    if (use_names && t != root) {
      auto it = names_.find(t);
      if (it != names_.end()) return it->second;
    }
    const Term& n = ctx_.term(t);
    switch (n.kind) {
      case Kind::True: return "true";
      case Kind::False: return "false";
      case Kind::Not: return app("not", n.args, root);
      case Kind::And: return app("and", n.args, root);
      case Kind::Or: return app("or", n.args, root);
      case Kind::Eq: return app("=", n.args, root);
      case Kind::Select: return app("select", n.args, root);
      case Kind::Store: return app("store", n.args, root);
      case Kind::Diff: return app("diff", n.args, root);
      case Kind::EqPred:
        if (!allow_internal_)
          throw std::logic_error("internal error: EQ predicate in a printed term");
        return app("EQ!", n.args, root);
      case Kind::Hole:
        if (!allow_internal_)
          throw std::logic_error("internal error: template hole in a printed term");
        return "_hole_";
      case Kind::Aux:
        if (!allow_internal_)
          throw std::logic_error("internal error: auxiliary variable in a printed term");
        return ctx_.aux(n.sym).name;
      case Kind::App: {
        const FunDecl& d = ctx_.fun(n.sym);
        if (n.args.empty()) return d.name;
        return app(d.name, n.args, root);
      }
    }
    return "?";
  }

  std::string app(const std::string& head, const std::vector<TermId>& args, TermId root) {
    std::string s = "(" + head;
    for (TermId a : args) { s += ' '; s += print_node(a, true, root); }
    s += ')';
    return s;
  }

  const Context& ctx_;
  bool allow_internal_;
  std::unordered_map<TermId, std::string> names_;
};

inline std::string print_term(const Context& ctx, TermId t) { return Printer(ctx).print(t); }

// Debug form; tolerates internal symbols.
inline std::string debug_term(const Context& ctx, TermId t) { return Printer(ctx, true).print(t); }

}  // namespace weqinterp

#endif  // WEQINTERP_SMTLIB_HPP
