//===--- sexp.hpp - S-expression reader and writer --------------------------===//
//
// Part of the dfy-toolchain project.
// Licensed under the Apache License v2.0.
//
//===----------------------------------------------------------------------===//
//
// Generic S-expressions: atoms (bare or quoted strings) and lists, with a
// lexer tracking line/column for diagnostics. `;` starts a line comment.
// Quoted atoms use backslash escaping for `"` and `\`.
//
//===----------------------------------------------------------------------===//

#pragma once

#include "dfy/result.hpp"

#include <cctype>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace dfy {

struct SExp;
using SExpPtr = std::shared_ptr<const SExp>;

struct SExp {
  struct Atom {
    std::string text;
    bool quoted = false; // written as "..." in the source
  };
  std::variant<Atom, std::vector<SExpPtr>> node;
  int line = 0, col = 0;

  bool is_atom() const { return node.index() == 0; }
  bool is_list() const { return node.index() == 1; }
  const Atom &atom() const { return std::get<Atom>(node); }
  const std::vector<SExpPtr> &list() const {
    return std::get<std::vector<SExpPtr>>(node);
  }
};

inline SExpPtr mk_atom(std::string text, bool quoted = false, int line = 0,
                       int col = 0) {
  return std::make_shared<const SExp>(
      SExp{SExp::Atom{std::move(text), quoted}, line, col});
}

inline SExpPtr mk_list(std::vector<SExpPtr> items, int line = 0, int col = 0) {
  return std::make_shared<const SExp>(SExp{std::move(items), line, col});
}

struct ParseError {
  std::string message;
  int line = 0, col = 0;

  std::string to_string() const {
    return std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  }
};

namespace sexp_detail {

class Lexer {
public:
  explicit Lexer(std::string_view text) : text_(text) {}

  void skip_ws() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ';') {
        while (pos_ < text_.size() && text_[pos_] != '\n')
          ++pos_;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        if (c == '\n') {
          ++line_;
          col_ = 1;
        } else {
          ++col_;
        }
        ++pos_;
        continue;
      } else {
        break;
      }
    }
  }

  bool eof() {
    skip_ws();
    return pos_ >= text_.size();
  }

  int line() const { return line_; }
  int col() const { return col_; }

  Result<SExpPtr, ParseError> next() {
    skip_ws();
    if (pos_ >= text_.size())
      return Result<SExpPtr, ParseError>::err(
          {"unexpected end of input", line_, col_});
    int l = line_, c = col_;
    char ch = text_[pos_];
    if (ch == '(') {
      advance();
      std::vector<SExpPtr> items;
      for (;;) {
        skip_ws();
        if (pos_ >= text_.size())
          return Result<SExpPtr, ParseError>::err(
              {"unterminated list (expected ')')", l, c});
        if (text_[pos_] == ')') {
          advance();
          return mk_list(std::move(items), l, c);
        }
        auto item = next();
        if (!item.ok())
          return item;
        items.push_back(std::move(item.value()));
      }
    }
    if (ch == ')')
      return Result<SExpPtr, ParseError>::err({"unexpected ')'", l, c});
    if (ch == '"') {
      advance();
      std::string out;
      while (pos_ < text_.size() && text_[pos_] != '"') {
        char d = text_[pos_];
        if (d == '\\') {
          advance();
          if (pos_ >= text_.size())
            return Result<SExpPtr, ParseError>::err(
                {"unterminated escape in string", l, c});
          char e = text_[pos_];
          if (e != '"' && e != '\\')
            return Result<SExpPtr, ParseError>::err(
                {std::string("invalid escape '\\") + e + "'", line_, col_});
          out.push_back(e);
        } else if (d == '\n') {
          return Result<SExpPtr, ParseError>::err(
              {"newline in string literal", l, c});
        } else {
          out.push_back(d);
        }
        advance();
      }
      if (pos_ >= text_.size())
        return Result<SExpPtr, ParseError>::err(
            {"unterminated string literal", l, c});
      advance(); // closing quote
      return mk_atom(std::move(out), /*quoted=*/true, l, c);
    }
    // Bare atom: up to whitespace, parens, quote, or comment start.
    std::string out;
    while (pos_ < text_.size()) {
      char d = text_[pos_];
      if (d == '(' || d == ')' || d == '"' || d == ';' || d == ' ' ||
          d == '\t' || d == '\r' || d == '\n')
        break;
      out.push_back(d);
      advance();
    }
    return mk_atom(std::move(out), /*quoted=*/false, l, c);
  }

private:
  void advance() {
    if (pos_ < text_.size()) {
      if (text_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

} // namespace sexp_detail

/// Parse exactly one S-expression; trailing content is an error.
inline Result<SExpPtr, ParseError> parse_sexp(std::string_view text) {
  sexp_detail::Lexer lx(text);
  if (lx.eof())
    return Result<SExpPtr, ParseError>::err({"empty input", 1, 1});
  auto r = lx.next();
  if (!r.ok())
    return r;
  if (!lx.eof())
    return Result<SExpPtr, ParseError>::err(
        {"trailing content after expression", lx.line(), lx.col()});
  return r;
}

/// Parse a whole file: zero or more S-expressions.
inline Result<std::vector<SExpPtr>, ParseError>
parse_sexps(std::string_view text) {
  sexp_detail::Lexer lx(text);
  std::vector<SExpPtr> out;
  while (!lx.eof()) {
    auto r = lx.next();
    if (!r.ok())
      return Result<std::vector<SExpPtr>, ParseError>::err(r.error());
    out.push_back(std::move(r.value()));
  }
  return out;
}

namespace sexp_detail {

inline bool needs_quoting(const std::string &s) {
  if (s.empty())
    return true;
  for (char c : s)
    if (c == '(' || c == ')' || c == '"' || c == ';' || c == '\\' ||
        std::isspace(static_cast<unsigned char>(c)))
      return true;
  return false;
}

inline void print_rec(const SExp &e, std::string &out, int indent,
                      int width_budget);

inline size_t flat_size(const SExp &e) {
  if (e.is_atom())
    return e.atom().text.size() + (e.atom().quoted ? 2 : 0);
  size_t n = 2;
  for (const auto &it : e.list())
    n += flat_size(*it) + 1;
  return n;
}

inline void print_atom(const SExp::Atom &a, std::string &out) {
  if (a.quoted || needs_quoting(a.text)) {
    out.push_back('"');
    for (char c : a.text) {
      if (c == '"' || c == '\\')
        out.push_back('\\');
      out.push_back(c);
    }
    out.push_back('"');
  } else {
    out += a.text;
  }
}

inline void print_flat(const SExp &e, std::string &out) {
  if (e.is_atom()) {
    print_atom(e.atom(), out);
    return;
  }
  out.push_back('(');
  bool first = true;
  for (const auto &it : e.list()) {
    if (!first)
      out.push_back(' ');
    first = false;
    print_flat(*it, out);
  }
  out.push_back(')');
}

inline void print_rec(const SExp &e, std::string &out, int indent,
                      int width_budget) {
  if (e.is_atom() || (int)flat_size(e) <= width_budget) {
    print_flat(e, out);
    return;
  }
  const auto &items = e.list();
  out.push_back('(');
  for (size_t i = 0; i < items.size(); ++i) {
    if (i == 0) {
      print_rec(*items[i], out, indent + 2, width_budget - 1);
    } else {
      out.push_back('\n');
      out.append(indent + 2, ' ');
      print_rec(*items[i], out, indent + 2, width_budget - indent - 2);
    }
  }
  out.push_back(')');
}

} // namespace sexp_detail

/// Single-line rendering.
inline std::string print_sexp_flat(const SExp &e) {
  std::string out;
  sexp_detail::print_flat(e, out);
  return out;
}

/// Multi-line rendering that keeps small subtrees on one line.
inline std::string print_sexp(const SExp &e, int width = 80) {
  std::string out;
  sexp_detail::print_rec(e, out, 0, width);
  return out;
}

} // namespace dfy
