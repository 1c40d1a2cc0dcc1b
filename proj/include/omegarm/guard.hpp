#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "omegarm/mdp.hpp"

namespace omegarm {

/// Boolean formula over atomic propositions, denoting a set of letters of 2^AP.
///
/// Grammar, lowest precedence first:
///   or   := and ('|' and)*
///   and  := not ('&' not)*
///   not  := '!' not | atom
///   atom := 'true' | 'false' | identifier | '(' or ')'
/// Identifiers match [A-Za-z_][A-Za-z0-9_]* and are case-sensitive.
class Guard {
 public:
  enum class Op : std::uint8_t { kTrue, kFalse, kAp, kNot, kAnd, kOr };

  struct Node {
    Op op;
    std::uint32_t lhs = 0;  // kAp: proposition index; kNot/kAnd/kOr: child
    std::uint32_t rhs = 0;  // kAnd/kOr: second child
  };

  /// Constant-true guard.
  Guard();

  static Guard constant(bool value);
  static Guard proposition(std::size_t index);

  /// Throws ParseError (with 1-based column) on syntax errors and on
  /// identifiers that are not in ap_names.
  static Guard parse(std::string_view text, const std::vector<std::string>& ap_names);

  bool eval(Label label) const;

  /// Canonical text using the given AP names; reparses to an equal tree.
  std::string to_string(const std::vector<std::string>& ap_names) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  std::uint32_t root() const { return root_; }

  friend bool operator==(const Guard&, const Guard&);

 private:
  std::uint32_t add(Node n);
  bool eval_at(std::uint32_t i, Label label) const;
  void print(std::uint32_t i, int parent_prec, const std::vector<std::string>& ap,
             std::string& out) const;
  bool equal_at(std::uint32_t i, const Guard& other, std::uint32_t j) const;

  friend class GuardParser;

  std::vector<Node> nodes_;
  std::uint32_t root_ = 0;
};

/// Label bitmask for a list of AP names; throws ModelError on unknown names.
Label make_label(const std::vector<std::string>& names, const std::vector<std::string>& ap_names);

/// AP names present in label, in AP order.
std::vector<std::string> label_names(Label label, const std::vector<std::string>& ap_names);

}  // namespace omegarm
