#include "omegarm/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "omegarm/envs.hpp"
#include "omegarm/errors.hpp"
#include "omegarm/learn.hpp"
#include "omegarm/model_file.hpp"
#include "omegarm/modelcheck.hpp"
#include "omegarm/product.hpp"
#include "omegarm/translate.hpp"

namespace omegarm {

namespace {

struct Knob {
  const char* key;
  const char* help;
};

constexpr Knob kKnobs[] = {
    {"f", "trap reward f, at least 1 (default 10)"},
    {"zeta", "copy-1 continuation probability in [0,1) (default 0.99)"},
    {"gamma", "learner discount (default 0.999)"},
    {"alpha", "learning rate (default 0.01)"},
    {"epsilon", "exploration rate (default 0.1)"},
    {"init", "initial Q value (default 0)"},
    {"ep-l", "copy-1 steps without acceptance before reset (default 20)"},
    {"ep-n", "number of training episodes (default 20000)"},
    {"lambda", "discount factor of the objective (default 0.99)"},
    {"seed", "random seed (default 1)"},
};

struct Options {
  std::string model;
  std::string env;
  std::string out_dir;
  std::string strategy;
  double stitch_eps = 0.1;
  std::size_t curve_every = 0;
  std::map<std::string, double> knob_values;
  std::vector<std::pair<std::string, CLI::Option*>> knob_opts;  // every subcommand's copy
};

void add_source(CLI::App* cmd, Options& o) {
  auto* m = cmd->add_option("--model", o.model, "model file");
  auto* e = cmd->add_option("--env", o.env, "built-in environment (lemma1, two_wecs, office, office_zap)");
  m->excludes(e);
}

void add_knobs(CLI::App* cmd, Options& o, std::initializer_list<std::string> keys) {
  for (const Knob& k : kKnobs) {
    if (std::find(keys.begin(), keys.end(), k.key) == keys.end()) continue;
    o.knob_opts.emplace_back(k.key, cmd->add_option(std::string("--") + k.key, o.knob_values[k.key], k.help));
  }
}

ModelBundle load(const Options& o) {
  if (o.model.empty() && o.env.empty()) throw ParameterError("one of --model or --env is required");
  return o.env.empty() ? load_model_file(o.model) : make_env(o.env);
}

/// Built-in defaults, then the model's defaults section, then flags.
Hyperparams resolve(const ModelBundle& b, const Options& o) {
  Hyperparams hp;
  hp.apply(b.defaults);
  for (const auto& [key, opt] : o.knob_opts) {
    if (opt->count() > 0) hp.set(key, o.knob_values.at(key));
  }
  hp.validate();
  return hp;
}

std::string fixed(double x, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string product_state_name(const ProductMdp& p, StateId q) {
  if (!p.has_back_maps()) return std::to_string(q);
  return "(" + std::to_string(p.states[q].mdp_state) + "," + std::to_string(p.states[q].machine_state) + ")";
}

void write_file(const Options& o, const std::string& name, const std::string& content) {
  if (o.out_dir.empty()) return;
  std::filesystem::create_directories(o.out_dir);
  const auto path = std::filesystem::path(o.out_dir) / name;
  std::ofstream f(path);
  f << content;
  if (!f) throw ModelError("cannot write " + path.string());
}

std::string report_text(const LearnReport& r) {
  std::ostringstream s;
  s << "psat " << fixed(r.psat, 9) << "\n"
    << "value " << fixed(r.value, 9) << "\n"
    << "blike " << fixed(r.blike, 9) << "\n"
    << "bval " << fixed(r.bval, 9) << "\n"
    << "psat_gap " << fixed(r.psat_gap(), 9) << "\n"
    << "value_gap " << fixed(r.value_gap(), 9) << "\n"
    << "switch_step " << r.switch_step << "\n"
    << "stitch_epsilon " << format_number(r.epsilon) << "\n"
    << "buchi_optimal " << (r.buchi_optimal() ? "yes" : "no") << "\n";
  return s.str();
}

int cmd_mc(const Options& o, std::ostream& out) {
  const ModelBundle b = load(o);
  const Hyperparams hp = resolve(b, o);
  if (!(o.stitch_eps > 0.0)) throw ParameterError("--stitch-eps must be positive");
  const ProductMdp p = build_product(b.mdp, b.machine);
  const ModelCheckResult mc = model_check(p, hp.lambda);
  const StitchedStrategy st = stitch(mc.buchi, mc.discounted, hp.lambda, o.stitch_eps, mc.rmax);
  const StitchedEvaluation ev = evaluate_stitched(p, st, hp.lambda);

  std::ostringstream report;
  report << "product_states " << p.num_states() << "\n"
         << "pruned_states " << mc.pruned.num_alive() << "\n"
         << "pruned_actions " << mc.pruned.num_actions() << "\n"
         << "lambda " << format_number(hp.lambda) << "\n"
         << "blike(q0)=" << fixed(mc.blike(p.init())) << "\n"
         << "bval(q0)=" << fixed(mc.bval(p.init())) << "\n"
         << "switch_step " << st.switch_step << "\n"
         << "psat=" << fixed(ev.psat) << "\n"
         << "value=" << fixed(ev.value) << "\n";
  out << report.str();

  std::ostringstream values;
  values << "state,name,blike,bval\n";
  for (StateId q = 0; q < p.num_states(); ++q) {
    values << q << "," << product_state_name(p, q) << "," << format_number(mc.blike(q)) << ","
           << (mc.pruned.alive[q] ? format_number(mc.bval(q)) : "") << "\n";
  }
  std::ostringstream strategy;
  strategy << "switch_step " << st.switch_step << "\n# state head tail safe\n";
  for (StateId q = 0; q < p.num_states(); ++q) {
    strategy << product_state_name(p, q) << " "
             << (mc.pruned.alive[q] ? p.mdp.action(q, st.head.choice[q]).name : "-") << " "
             << p.mdp.action(q, st.tail.choice[q]).name << " ";
    const auto& safe = mc.buchi.safe_actions[q];
    for (std::size_t i = 0; i < safe.size(); ++i) strategy << (i ? "," : "") << p.mdp.action(q, safe[i]).name;
    strategy << "\n";
  }
  write_file(o, "report.txt", report.str());
  write_file(o, "values.csv", values.str());
  write_file(o, "strategy.txt", strategy.str());
  return kExitOk;
}

int cmd_translate(const Options& o, std::ostream& out) {
  const ModelBundle b = load(o);
  const Hyperparams hp = resolve(b, o);
  const ProductMdp p = build_product(b.mdp, b.machine);
  const TranslatedMdp tm = translate(p, hp.lambda, hp.zeta, hp.f);
  const TotalValueSolution sol = solve_total(tm);
  const ModelCheckResult mc = model_check(p, hp.lambda);

  double band0 = 0.0, band1 = 0.0;
  for (StateId q = 0; q < p.num_states(); ++q) {
    band1 = std::max(band1, std::abs(sol.v[tm.state(q, 1)] - hp.f * mc.blike(q)));
    if (mc.pruned.alive[q]) {
      band0 = std::max(band0, std::abs(sol.v[tm.state(q, 0)] - mc.bval(q) - hp.f * mc.blike(q)));
    }
  }
  const StateId q0 = p.init();
  std::ostringstream report;
  report << "translated_states " << tm.mdp.num_states() << "\n"
         << "lambda " << format_number(hp.lambda) << "\nzeta " << format_number(hp.zeta) << "\nf "
         << format_number(hp.f) << "\n"
         << "val'((q0,0))=" << fixed(sol.v[tm.state(q0, 0)]) << "\n"
         << "bval+f*blike=" << fixed(mc.bval(q0) + hp.f * mc.blike(q0)) << "\n"
         << "val'((q0,1))=" << fixed(sol.v[tm.state(q0, 1)]) << "\n"
         << "f*blike=" << fixed(hp.f * mc.blike(q0)) << "\n"
         << "max_copy0_deviation " << fixed(band0, 9) << "\n"
         << "max_copy1_deviation " << fixed(band1, 9) << "\n";
  out << report.str();

  std::ostringstream values;
  values << "state,name,value\n";
  for (StateId s = 0; s < tm.mdp.num_states(); ++s) {
    values << s << "," << tm.state_name(s) << "," << format_number(sol.v[s]) << "\n";
  }
  write_file(o, "report.txt", report.str());
  write_file(o, "values.csv", values.str());
  return kExitOk;
}

std::string translated_strategy_text(const TranslatedMdp& tm, const PositionalStrategy& sigma) {
  std::ostringstream s;
  s << "# translated-state action-index action-name\n";
  for (StateId x = 0; x < tm.mdp.num_states(); ++x) {
    s << tm.state_name(x) << " " << sigma.choice[x] << " " << tm.mdp.action(x, sigma.choice[x]).name << "\n";
  }
  return s.str();
}

PositionalStrategy parse_translated_strategy(const TranslatedMdp& tm, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ModelError("cannot read strategy file " + path);
  std::map<std::string, StateId> ids;
  for (StateId x = 0; x < tm.mdp.num_states(); ++x) ids[tm.state_name(x)] = x;
  PositionalStrategy sigma;
  sigma.choice.assign(tm.mdp.num_states(), 0);
  std::vector<char> seen(tm.mdp.num_states(), 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    std::istringstream in(line);
    std::string name;
    if (!(in >> name) || name[0] == '#') continue;
    long long action = -1;
    if (!(in >> action) || action < 0) throw ParseError(path + ": expected an action index", line_no);
    const auto it = ids.find(name);
    if (it == ids.end()) throw ParseError(path + ": unknown state '" + name + "'", line_no);
    if (static_cast<std::size_t>(action) >= tm.mdp.num_actions(it->second)) {
      throw ParseError(path + ": action " + std::to_string(action) + " not enabled at " + name, line_no);
    }
    sigma.choice[it->second] = static_cast<ActionIndex>(action);
    seen[it->second] = 1;
  }
  for (StateId x = 0; x < tm.mdp.num_states(); ++x) {
    if (!seen[x] && !tm.is_trap(x)) throw ParseError(path + ": no action for state " + tm.state_name(x));
  }
  return sigma;
}

int cmd_learn(const Options& o, std::ostream& out) {
  const ModelBundle b = load(o);
  const Hyperparams hp = resolve(b, o);
  if (!(o.stitch_eps > 0.0)) throw ParameterError("--stitch-eps must be positive");
  const ProductMdp p = build_product(b.mdp, b.machine);
  const TranslatedMdp tm = translate(p, hp.lambda, hp.zeta, hp.f);
  const Certifier cert(p, hp.lambda, o.stitch_eps);
  const std::size_t every = o.curve_every > 0 ? o.curve_every : std::max<std::size_t>(1, hp.ep_num / 100);

  std::ostringstream curve;
  curve << "episode,psat,value\n";
  auto record = [&](std::size_t episode, const QTable& q) {
    const LearnReport r = cert.certify(greedy(q));
    curve << episode << "," << format_number(r.psat) << "," << format_number(r.value) << "\n";
  };
  record(0, QTable(tm.mdp, hp.init));
  const QTable q = q_learn(tm, hp, [&](std::size_t episode, const QTable& table) {
    if (episode % every == 0 || episode == hp.ep_num) record(episode, table);
  });
  const PositionalStrategy sigma = greedy(q);
  const LearnReport r = cert.certify(sigma);

  std::ostringstream report;
  report << "episodes " << hp.ep_num << "\nseed " << hp.seed << "\n" << report_text(r);
  out << report.str();

  std::ostringstream values;
  values << "state,name,q_max\n";
  for (StateId x = 0; x < tm.mdp.num_states(); ++x) {
    values << x << "," << tm.state_name(x) << "," << format_number(q.max(x)) << "\n";
  }
  write_file(o, "report.txt", report.str());
  write_file(o, "curve.csv", curve.str());
  write_file(o, "values.csv", values.str());
  write_file(o, "strategy.txt", translated_strategy_text(tm, sigma));
  return kExitOk;
}

int cmd_certify(const Options& o, std::ostream& out) {
  const ModelBundle b = load(o);
  const Hyperparams hp = resolve(b, o);
  if (!(o.stitch_eps > 0.0)) throw ParameterError("--stitch-eps must be positive");
  const ProductMdp p = build_product(b.mdp, b.machine);
  const TranslatedMdp tm = translate(p, hp.lambda, hp.zeta, hp.f);
  const PositionalStrategy sigma = parse_translated_strategy(tm, o.strategy);
  const LearnReport r = certify(p, sigma, hp.lambda, o.stitch_eps);
  const std::string text = report_text(r);
  out << text;
  write_file(o, "report.txt", text);
  return kExitOk;
}

int cmd_env(const std::string& name, const std::string& path, std::ostream& out) {
  const std::string text = serialize_model(make_env(name));
  if (path.empty()) {
    out << text;
  } else {
    std::ofstream f(path);
    f << text;
    if (!f) throw ModelError("cannot write " + path);
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Model checking and learning for omega-regular reward machines", "omegarm"};
  app.require_subcommand(1);
  Options o;

  auto* mc = app.add_subcommand("mc", "model check a product: blike, bval, stitched strategy");
  add_source(mc, o);
  add_knobs(mc, o, {"lambda"});
  mc->add_option("--stitch-eps", o.stitch_eps, "value tolerance of the stitched strategy (default 0.1)");
  mc->add_option("--out", o.out_dir, "directory for report.txt, values.csv, strategy.txt");

  auto* tr = app.add_subcommand("translate", "solve the total-reward translation exactly");
  add_source(tr, o);
  add_knobs(tr, o, {"f", "zeta", "lambda"});
  tr->add_option("--out", o.out_dir, "directory for report.txt, values.csv");

  auto* learn = app.add_subcommand("learn", "Q-learning on the translation, then certification");
  add_source(learn, o);
  add_knobs(learn, o, {"f", "zeta", "gamma", "alpha", "epsilon", "init", "ep-l", "ep-n", "lambda", "seed"});
  learn->add_option("--stitch-eps", o.stitch_eps, "value tolerance used for certification (default 0.1)");
  learn->add_option("--curve-every", o.curve_every, "episodes between curve rows (default ep-n/100)");
  learn->add_option("--out", o.out_dir, "directory for report.txt, curve.csv, values.csv, strategy.txt");

  auto* cert = app.add_subcommand("certify", "certify a translated-MDP strategy file");
  add_source(cert, o);
  add_knobs(cert, o, {"f", "zeta", "lambda"});
  cert->add_option("--strategy", o.strategy, "strategy.txt written by learn")->required();
  cert->add_option("--stitch-eps", o.stitch_eps, "value tolerance used for certification (default 0.1)");
  cert->add_option("--out", o.out_dir, "directory for report.txt");

  std::string env_name, env_out;
  auto* env = app.add_subcommand("env", "write a built-in environment as a model file");
  env->add_option("name", env_name, "lemma1, two_wecs, office or office_zap")->required();
  env->add_option("--out", env_out, "output file (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParameter;
  }

  try {
    if (mc->parsed()) return cmd_mc(o, out);
    if (tr->parsed()) return cmd_translate(o, out);
    if (learn->parsed()) return cmd_learn(o, out);
    if (cert->parsed()) return cmd_certify(o, out);
    return cmd_env(env_name, env_out, out);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IncompleteMachineError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return kExitParameter;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace omegarm
