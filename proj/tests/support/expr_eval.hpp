// Test-only exact rational expression evaluator.  Deliberately independent of
// the library code paths: formulas are re-stated as strings and interpreted
// here, so a transcription error in either route shows up as a mismatch.
#pragma once

#include <cctype>
#include <map>
#include <stdexcept>
#include <string>

#include "core/util.hpp"

namespace expreval {

class Evaluator {
 public:
  Evaluator(std::string src, std::map<std::string, aplab::Rat> vars)
      : src_(std::move(src)), vars_(std::move(vars)) {}

  aplab::Rat run() {
    aplab::Rat v = expr();
    skip();
    if (pos_ != src_.size()) throw std::runtime_error("trailing input in expression");
    return v;
  }

 private:
  std::string src_;
  std::map<std::string, aplab::Rat> vars_;
  std::size_t pos_ = 0;

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  char peek() {
    skip();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  aplab::Rat expr() {
    aplab::Rat v = term();
    while (true) {
      if (eat('+'))
        v += term();
      else if (eat('-'))
        v -= term();
      else
        return v;
    }
  }

  aplab::Rat term() {
    aplab::Rat v = factor();
    while (true) {
      if (eat('*')) {
        v *= factor();
      } else if (eat('/')) {
        aplab::Rat d = factor();
        if (d == 0) throw std::runtime_error("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  aplab::Rat factor() {
    bool neg = eat('-');
    aplab::Rat v = primary();
    if (eat('^')) {
      skip();
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      if (start == pos_) throw std::runtime_error("expected exponent");
      long e = std::stol(src_.substr(start, pos_ - start));
      v = aplab::rat_pow(v, e);
    }
    return neg ? aplab::Rat(-v) : v;
  }

  aplab::Rat primary() {
    skip();
    if (eat('(')) {
      aplab::Rat v = expr();
      if (!eat(')')) throw std::runtime_error("expected ')'");
      return v;
    }
    if (std::isdigit(static_cast<unsigned char>(peek()))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      return aplab::Rat(aplab::Int(src_.substr(start, pos_ - start)));
    }
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    if (start == pos_) throw std::runtime_error("unexpected character in expression");
    auto it = vars_.find(src_.substr(start, pos_ - start));
    if (it == vars_.end())
      throw std::runtime_error("unknown variable " + src_.substr(start, pos_ - start));
    return it->second;
  }
};

inline aplab::Rat eval(const std::string& src, std::map<std::string, aplab::Rat> vars) {
  return Evaluator(src, std::move(vars)).run();
}

}  // namespace expreval
