#include "omegarm/model_file.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "omegarm/errors.hpp"

namespace omegarm {

namespace {

constexpr std::array<std::string_view, 10> kDefaultKeys = {
    "f", "zeta", "gamma", "alpha", "epsilon", "init", "ep-l", "ep-n", "lambda", "seed"};

struct Token {
  std::string text;
  bool quoted = false;
  std::size_t column = 0;
};

class LineParser {
 public:
  LineParser(std::string_view line, std::size_t lineno) : lineno_(lineno) { tokenize(line); }

  [[noreturn]] void syntax(const std::string& msg, std::size_t column = 0) const {
    throw ParseError("line " + std::to_string(lineno_) + ": " + msg, lineno_, column);
  }
  [[noreturn]] void semantic(const std::string& msg) const {
    throw ModelError("line " + std::to_string(lineno_) + ": " + msg);
  }

  const std::vector<Token>& tokens() const { return tokens_; }
  bool empty() const { return tokens_.empty(); }
  std::size_t lineno() const { return lineno_; }

  std::size_t to_index(const Token& t, const char* what) const {
    std::size_t v = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.quoted || ec != std::errc() || ptr != last) {
      syntax(std::string("expected ") + what + ", got '" + t.text + "'", t.column);
    }
    return v;
  }

  double to_number(const Token& t, const char* what) const {
    double v = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (t.quoted || ec != std::errc() || ptr != last || !std::isfinite(v)) {
      syntax(std::string("expected ") + what + ", got '" + t.text + "'", t.column);
    }
    return v;
  }

 private:
  void tokenize(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
      const char c = line[i];
      if (c == '#') break;
      if (std::isspace(static_cast<unsigned char>(c))) {
        ++i;
        continue;
      }
      if (c == '"') {
        const std::size_t end = line.find('"', i + 1);
        if (end == std::string_view::npos) syntax("unterminated string", i + 1);
        tokens_.push_back({std::string(line.substr(i + 1, end - i - 1)), true, i + 1});
        i = end + 1;
        continue;
      }
      // ':' and ',' are separate tokens so "label 3: A" and "1 0.5,2 0.5" split cleanly.
      if (c == ':' || c == ',') {
        tokens_.push_back({std::string(1, c), false, i + 1});
        ++i;
        continue;
      }
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
             line[i] != ':' && line[i] != ',' && line[i] != '"' && line[i] != '#') {
        ++i;
      }
      tokens_.push_back({std::string(line.substr(start, i - start)), false, start + 1});
    }
  }

  std::size_t lineno_;
  std::vector<Token> tokens_;
};

bool is(const Token& t, std::string_view word) { return !t.quoted && t.text == word; }

enum class Section { kNone, kMdp, kOrm, kDefaults };

struct Builder {
  std::vector<std::string> ap;
  bool have_ap = false;
  std::optional<std::size_t> mdp_states;
  std::optional<StateId> mdp_init;
  std::vector<Label> labels;
  std::vector<char> labelled;
  std::vector<std::vector<Action>> actions;

  std::optional<std::size_t> orm_states;
  std::optional<MachineState> orm_init;
  std::optional<OmegaRewardMachine> machine;
  std::vector<std::pair<MachineEdge, std::size_t>> pending_edges;

  std::map<std::string, double> defaults;
};

void parse_mdp_line(const LineParser& lp, Builder& b) {
  const auto& t = lp.tokens();
  if (is(t[0], "ap")) {
    if (t.size() < 2 || !is(t[1], ":")) lp.syntax("expected 'ap: NAME ...'");
    if (b.have_ap) lp.syntax("duplicate 'ap' line");
    std::set<std::string> seen;
    for (std::size_t i = 2; i < t.size(); ++i) {
      const std::string& name = t[i].text;
      const bool ident = !name.empty() && (std::isalpha(static_cast<unsigned char>(name[0])) ||
                                           name[0] == '_');
      if (t[i].quoted || !ident || name == "true" || name == "false") {
        lp.syntax("invalid atomic proposition '" + name + "'", t[i].column);
      }
      if (!seen.insert(name).second) lp.semantic("duplicate atomic proposition '" + name + "'");
      b.ap.push_back(name);
    }
    if (b.ap.size() > kMaxAtomicPropositions) lp.semantic("too many atomic propositions");
    b.have_ap = true;
    return;
  }
  if (is(t[0], "states")) {
    if (t.size() != 3 || !is(t[1], ":")) lp.syntax("expected 'states: N'");
    if (b.mdp_states) lp.syntax("duplicate 'states' line");
    const std::size_t n = lp.to_index(t[2], "state count");
    if (n == 0) lp.semantic("MDP needs at least one state");
    b.mdp_states = n;
    b.labels.assign(n, 0);
    b.labelled.assign(n, 0);
    b.actions.assign(n, {});
    return;
  }
  if (!b.mdp_states) lp.syntax("'states' must precede '" + t[0].text + "'");
  const std::size_t n = *b.mdp_states;
  auto state_ref = [&](const Token& tok) {
    const std::size_t s = lp.to_index(tok, "state id");
    if (s >= n) lp.semantic("dangling state id " + std::to_string(s));
    return s;
  };

  if (is(t[0], "init")) {
    if (t.size() != 3 || !is(t[1], ":")) lp.syntax("expected 'init: STATE'");
    b.mdp_init = state_ref(t[2]);
    return;
  }
  if (is(t[0], "label")) {
    if (t.size() < 3 || !is(t[2], ":")) lp.syntax("expected 'label STATE: AP ...'");
    const StateId s = state_ref(t[1]);
    if (b.labelled[s]) lp.semantic("state " + std::to_string(s) + " labelled twice");
    std::vector<std::string> names;
    for (std::size_t i = 3; i < t.size(); ++i) names.push_back(t[i].text);
    try {
      b.labels[s] = make_label(names, b.ap);
    } catch (const ModelError& e) {
      lp.semantic(e.what());
    }
    b.labelled[s] = 1;
    return;
  }
  if (is(t[0], "action")) {
    if (t.size() < 5 || !is(t[3], ":")) lp.syntax("expected 'action STATE NAME: TARGET PROB, ...'");
    const StateId s = state_ref(t[1]);
    const std::string& name = t[2].text;
    for (const Action& a : b.actions[s]) {
      if (a.name == name) lp.semantic("duplicate action '" + name + "' at state " + std::to_string(s));
    }
    std::vector<Branch> branches;
    std::size_t i = 4;
    double mass = 0.0;
    while (true) {
      if (i + 1 >= t.size()) lp.syntax("expected 'TARGET PROB'");
      const StateId target = state_ref(t[i]);
      const double p = lp.to_number(t[i + 1], "probability");
      if (!(p > 0.0) || p > 1.0) lp.semantic("probability " + t[i + 1].text + " outside (0,1]");
      branches.push_back({target, p});
      mass += p;
      i += 2;
      if (i == t.size()) break;
      if (!is(t[i], ",")) lp.syntax("expected ','", t[i].column);
      ++i;
    }
    if (std::abs(mass - 1.0) > kProbabilityTolerance) {
      std::ostringstream os;
      os << "probability mass of action '" << name << "' at state " << s << " is " << mass
         << ", expected 1";
      lp.semantic(os.str());
    }
    b.actions[s].push_back({name, std::move(branches)});
    return;
  }
  lp.syntax("unknown mdp directive '" + t[0].text + "'", t[0].column);
}

void parse_orm_line(const LineParser& lp, Builder& b) {
  const auto& t = lp.tokens();
  if (is(t[0], "ap")) {
    std::vector<std::string> names;
    for (std::size_t i = 2; i < t.size(); ++i) names.push_back(t[i].text);
    if (t.size() < 2 || !is(t[1], ":")) lp.syntax("expected 'ap: NAME ...'");
    if (names != b.ap) lp.semantic("machine atomic propositions differ from the MDP's");
    return;
  }
  if (is(t[0], "states")) {
    if (t.size() != 3 || !is(t[1], ":")) lp.syntax("expected 'states: N'");
    if (b.orm_states) lp.syntax("duplicate 'states' line");
    const std::size_t n = lp.to_index(t[2], "state count");
    if (n == 0) lp.semantic("reward machine needs at least one state");
    b.orm_states = n;
    return;
  }
  if (!b.orm_states) lp.syntax("'states' must precede '" + t[0].text + "'");
  auto state_ref = [&](const Token& tok) {
    const std::size_t u = lp.to_index(tok, "machine state id");
    if (u >= *b.orm_states) lp.semantic("dangling machine state id " + std::to_string(u));
    return u;
  };
  if (is(t[0], "init")) {
    if (t.size() != 3 || !is(t[1], ":")) lp.syntax("expected 'init: STATE'");
    b.orm_init = state_ref(t[2]);
    return;
  }
  if (is(t[0], "edge")) {
    if (t.size() < 4 || !t[2].quoted) lp.syntax("expected 'edge FROM \"GUARD\" TO [reward R] [accepting]'");
    MachineEdge e;
    e.source = state_ref(t[1]);
    try {
      e.guard = Guard::parse(t[2].text, b.ap);
    } catch (const ParseError& err) {
      if (err.what() && std::string(err.what()).find("unknown atomic proposition") != std::string::npos) {
        lp.semantic(err.what());
      }
      lp.syntax(err.what(), t[2].column + err.column());
    }
    e.target = state_ref(t[3]);
    for (std::size_t i = 4; i < t.size(); ++i) {
      if (is(t[i], "reward") && i + 1 < t.size()) {
        e.reward = lp.to_number(t[++i], "reward");
      } else if (is(t[i], "accepting")) {
        e.accepting = true;
      } else {
        lp.syntax("unexpected '" + t[i].text + "' in edge", t[i].column);
      }
    }
    b.pending_edges.emplace_back(std::move(e), lp.lineno());
    return;
  }
  lp.syntax("unknown orm directive '" + t[0].text + "'", t[0].column);
}

void parse_defaults_line(const LineParser& lp, Builder& b) {
  const auto& t = lp.tokens();
  if (t.size() != 3 || !is(t[1], ":")) lp.syntax("expected 'KEY: VALUE'");
  bool known = false;
  for (auto k : kDefaultKeys) known = known || t[0].text == k;
  if (!known) lp.semantic("unknown hyperparameter '" + t[0].text + "'");
  if (!b.defaults.emplace(t[0].text, lp.to_number(t[2], "number")).second) {
    lp.semantic("duplicate hyperparameter '" + t[0].text + "'");
  }
}

}  // namespace

std::string format_number(double x) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), ptr);
}

ModelBundle parse_model(std::string_view text) {
  Builder b;
  Section section = Section::kNone;
  std::size_t lineno = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++lineno;
    start = end + 1;

    LineParser lp(line, lineno);
    if (lp.empty()) continue;
    const auto& t = lp.tokens();
    if (t.size() == 1 && is(t[0], "mdp")) {
      if (section != Section::kNone) lp.syntax("'mdp' section must come first");
      section = Section::kMdp;
      continue;
    }
    if (t.size() == 1 && is(t[0], "orm")) {
      if (section != Section::kMdp) lp.syntax("'orm' section must follow 'mdp'");
      if (!b.have_ap) lp.syntax("mdp section lacks an 'ap' line");
      section = Section::kOrm;
      continue;
    }
    if (t.size() == 1 && is(t[0], "defaults")) {
      if (section != Section::kOrm) lp.syntax("'defaults' section must follow 'orm'");
      section = Section::kDefaults;
      continue;
    }
    switch (section) {
      case Section::kNone: lp.syntax("expected 'mdp'");
      case Section::kMdp: parse_mdp_line(lp, b); break;
      case Section::kOrm: parse_orm_line(lp, b); break;
      case Section::kDefaults: parse_defaults_line(lp, b); break;
    }
  }
  if (section == Section::kNone || section == Section::kMdp) {
    throw ParseError("missing 'orm' section", lineno);
  }
  if (!b.mdp_states) throw ParseError("mdp section lacks 'states'", lineno);
  if (!b.orm_states) throw ParseError("orm section lacks 'states'", lineno);

  ModelBundle out;
  out.mdp = Mdp(b.ap, *b.mdp_states, b.mdp_init.value_or(0));
  for (StateId s = 0; s < *b.mdp_states; ++s) {
    out.mdp.set_label(s, b.labels[s]);
    for (Action& a : b.actions[s]) out.mdp.add_action(s, std::move(a.name), std::move(a.branches));
  }
  const auto issues = validate(out.mdp);
  if (!issues.empty()) {
    std::string msg = "invalid MDP:";
    for (const auto& i : issues) msg += "\n  " + i.message;
    throw ModelError(msg);
  }

  out.machine = OmegaRewardMachine(b.ap, *b.orm_states, b.orm_init.value_or(0));
  for (auto& [edge, line] : b.pending_edges) out.machine.add_edge(std::move(edge));
  out.defaults = std::move(b.defaults);
  return out;
}

ModelBundle load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot read model file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return parse_model(os.str());
}

std::string serialize_model(const ModelBundle& bundle) {
  const Mdp& m = bundle.mdp;
  const auto& ap = m.ap();
  std::ostringstream os;
  os << "mdp\nap:";
  for (const auto& name : ap) os << ' ' << name;
  os << "\nstates: " << m.num_states() << "\ninit: " << m.init() << '\n';
  for (StateId s = 0; s < m.num_states(); ++s) {
    if (m.label(s) == 0) continue;
    os << "label " << s << ':';
    for (const auto& name : label_names(m.label(s), ap)) os << ' ' << name;
    os << '\n';
  }
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const Action& a : m.actions(s)) {
      os << "action " << s << ' ' << a.name << ':';
      for (std::size_t k = 0; k < a.branches.size(); ++k) {
        os << (k ? ", " : " ") << a.branches[k].target << ' ' << format_number(a.branches[k].prob);
      }
      os << '\n';
    }
  }
  const OmegaRewardMachine& rm = bundle.machine;
  os << "orm\nstates: " << rm.num_states() << "\ninit: " << rm.init() << '\n';
  for (const MachineEdge& e : rm.edges()) {
    os << "edge " << e.source << " \"" << e.guard.to_string(ap) << "\" " << e.target << " reward "
       << format_number(e.reward);
    if (e.accepting) os << " accepting";
    os << '\n';
  }
  if (!bundle.defaults.empty()) {
    os << "defaults\n";
    for (const auto& [key, value] : bundle.defaults) os << key << ": " << format_number(value) << '\n';
  }
  return os.str();
}

}  // namespace omegarm
