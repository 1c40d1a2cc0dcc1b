#include "omegarm/guard.hpp"

#include <algorithm>
#include <cctype>

#include "omegarm/errors.hpp"

namespace omegarm {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

int precedence(Guard::Op op) {
  switch (op) {
    case Guard::Op::kOr: return 1;
    case Guard::Op::kAnd: return 2;
    case Guard::Op::kNot: return 3;
    default: return 4;
  }
}

}  // namespace

class GuardParser {
 public:
  GuardParser(std::string_view text, const std::vector<std::string>& ap) : text_(text), ap_(ap) {}

  Guard run() {
    Guard g;
    g.nodes_.clear();
    out_ = &g;
    skip_ws();
    if (pos_ == text_.size()) fail("empty guard");
    g.root_ = parse_or();
    skip_ws();
    if (pos_ != text_.size()) fail(std::string("unexpected '") + text_[pos_] + "'");
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("guard \"" + std::string(text_) + "\": " + msg + " at column " +
                         std::to_string(pos_ + 1),
                     0, pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::uint32_t parse_or() {
    std::uint32_t lhs = parse_and();
    while (accept('|')) lhs = out_->add({Guard::Op::kOr, lhs, parse_and()});
    return lhs;
  }

  std::uint32_t parse_and() {
    std::uint32_t lhs = parse_not();
    while (accept('&')) lhs = out_->add({Guard::Op::kAnd, lhs, parse_not()});
    return lhs;
  }

  std::uint32_t parse_not() {
    if (accept('!')) return out_->add({Guard::Op::kNot, parse_not(), 0});
    return parse_atom();
  }

  std::uint32_t parse_atom() {
    skip_ws();
    if (pos_ == text_.size()) fail("unexpected end of guard");
    if (accept('(')) {
      const std::uint32_t inner = parse_or();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (!is_ident_start(text_[pos_])) fail(std::string("unexpected '") + text_[pos_] + "'");
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view ident = text_.substr(start, pos_ - start);
    if (ident == "true") return out_->add({Guard::Op::kTrue});
    if (ident == "false") return out_->add({Guard::Op::kFalse});
    const auto it = std::find(ap_.begin(), ap_.end(), ident);
    if (it == ap_.end()) {
      pos_ = start;
      fail("unknown atomic proposition '" + std::string(ident) + "'");
    }
    return out_->add({Guard::Op::kAp, static_cast<std::uint32_t>(it - ap_.begin())});
  }

  std::string_view text_;
  const std::vector<std::string>& ap_;
  std::size_t pos_ = 0;
  Guard* out_ = nullptr;
};

Guard::Guard() : nodes_{{Op::kTrue}}, root_(0) {}

Guard Guard::constant(bool value) {
  Guard g;
  g.nodes_[0].op = value ? Op::kTrue : Op::kFalse;
  return g;
}

Guard Guard::proposition(std::size_t index) {
  Guard g;
  g.nodes_[0] = {Op::kAp, static_cast<std::uint32_t>(index)};
  return g;
}

Guard Guard::parse(std::string_view text, const std::vector<std::string>& ap_names) {
  return GuardParser(text, ap_names).run();
}

std::uint32_t Guard::add(Node n) {
  nodes_.push_back(n);
  return static_cast<std::uint32_t>(nodes_.size() - 1);
}

bool Guard::eval(Label label) const { return eval_at(root_, label); }

bool Guard::eval_at(std::uint32_t i, Label label) const {
  const Node& n = nodes_[i];
  switch (n.op) {
    case Op::kTrue: return true;
    case Op::kFalse: return false;
    case Op::kAp: return (label >> n.lhs) & 1u;
    case Op::kNot: return !eval_at(n.lhs, label);
    case Op::kAnd: return eval_at(n.lhs, label) && eval_at(n.rhs, label);
    case Op::kOr: return eval_at(n.lhs, label) || eval_at(n.rhs, label);
  }
  return false;
}

std::string Guard::to_string(const std::vector<std::string>& ap_names) const {
  std::string out;
  print(root_, 0, ap_names, out);
  return out;
}

void Guard::print(std::uint32_t i, int parent_prec, const std::vector<std::string>& ap,
                  std::string& out) const {
  const Node& n = nodes_[i];
  const int prec = precedence(n.op);
  // Binary operators are left-associative, so a right child of equal
  // precedence needs parentheses to keep the tree shape on reparse.
  const bool paren = prec < parent_prec;
  if (paren) out += '(';
  switch (n.op) {
    case Op::kTrue: out += "true"; break;
    case Op::kFalse: out += "false"; break;
    case Op::kAp: out += ap.at(n.lhs); break;
    case Op::kNot:
      out += '!';
      print(n.lhs, prec, ap, out);
      break;
    case Op::kAnd:
    case Op::kOr:
      print(n.lhs, prec, ap, out);
      out += n.op == Op::kAnd ? " & " : " | ";
      print(n.rhs, prec + 1, ap, out);
      break;
  }
  if (paren) out += ')';
}

bool Guard::equal_at(std::uint32_t i, const Guard& other, std::uint32_t j) const {
  const Node& a = nodes_[i];
  const Node& b = other.nodes_[j];
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::kTrue:
    case Op::kFalse: return true;
    case Op::kAp: return a.lhs == b.lhs;
    case Op::kNot: return equal_at(a.lhs, other, b.lhs);
    case Op::kAnd:
    case Op::kOr: return equal_at(a.lhs, other, b.lhs) && equal_at(a.rhs, other, b.rhs);
  }
  return false;
}

bool operator==(const Guard& a, const Guard& b) { return a.equal_at(a.root_, b, b.root_); }

Label make_label(const std::vector<std::string>& names, const std::vector<std::string>& ap_names) {
  Label label = 0;
  for (const auto& name : names) {
    const auto it = std::find(ap_names.begin(), ap_names.end(), name);
    if (it == ap_names.end()) throw ModelError("unknown atomic proposition '" + name + "'");
    label |= Label{1} << (it - ap_names.begin());
  }
  return label;
}

std::vector<std::string> label_names(Label label, const std::vector<std::string>& ap_names) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ap_names.size(); ++i) {
    if ((label >> i) & 1u) out.push_back(ap_names[i]);
  }
  return out;
}

}  // namespace omegarm
