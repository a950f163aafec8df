// recsub: decide equality and subtyping of second-order equirecursive types.
//
// Subcommands:
//   check      run engines over a query file        (exit 0/1/2/3, see below)
//   tree       print a depth-bounded tree unrolling of one type
//   automaton  print the tree automaton of one type (text, --dot, --json)
//   fuzz       differential testing of the engines on random instances
//   bench      scaling measurement of the automata engine
//
// Exit codes: 0 all queries agree with their expectations; 1 some query
// disagrees; 2 parse or well-formedness error; 3 some engine exceeded its
// budget.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "recsub/automata.hpp"
#include "recsub/coinductive.hpp"
#include "recsub/harness.hpp"
#include "recsub/parser.hpp"
#include "recsub/syntax.hpp"
#include "recsub/tree.hpp"

namespace {

using recsub::Relation;
using recsub::Ty;
using recsub::Verdict;
using recsub::VerdictKind;
using json = nlohmann::ordered_json;

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json treeToJson(const recsub::Tr& t) {
  json j;
  switch (t->tag) {
    case recsub::TrTag::Cut:
      j["node"] = "cut";
      break;
    case recsub::TrTag::Var:
      j["node"] = "var";
      j["dist"] = t->dist;
      break;
    case recsub::TrTag::Free:
      j["node"] = "free";
      j["name"] = t->name;
      break;
    case recsub::TrTag::Fun:
      j["node"] = "fun";
      j["left"] = treeToJson(t->a);
      j["right"] = treeToJson(t->b);
      break;
    case recsub::TrTag::Forall:
      j["node"] = "forall";
      j["bound"] = treeToJson(t->a);
      j["body"] = treeToJson(t->b);
      break;
  }
  return j;
}

// Converts a standalone surface type, treating every free identifier as an
// implicitly declared opaque constant recorded in `env`.
Ty toCoreWithImplicits(const recsub::Surf& s, recsub::GlobalEnv& env) {
  std::vector<std::string> idents;
  std::function<void(const recsub::Surf&)> collect =
      [&](const recsub::Surf& n) {
        if (!n) return;
        if (n->tag == recsub::SurfTag::Var) idents.push_back(n->name);
        collect(n->a);
        collect(n->b);
      };
  collect(s);
  // Over-approximating the scope is harmless: binders shadow it.
  Ty t = recsub::toCore(s, idents);
  env.implicitFrees = recsub::freeNames(t);
  return t;
}

struct EngineResult {
  std::string engine;
  VerdictKind kind;
  recsub::Path witness;
  std::uint64_t promotions = 0;
  std::uint64_t assertions = 0;
  double millis = 0.0;
};

EngineResult runEngine(const std::string& engine, const recsub::GlobalEnv& env,
                       const Ty& l, const Ty& r, Relation rel,
                       std::uint64_t budget, int depth) {
  EngineResult out;
  out.engine = engine;
  auto t0 = std::chrono::steady_clock::now();
  if (engine == "coinductive") {
    recsub::Checker checker(env, budget);
    Verdict v = checker.check(l, r, rel);
    out.kind = v.kind;
    out.witness = v.witness;
    out.promotions = v.promotions;
    out.assertions = v.assertions;
  } else if (engine == "automata") {
    Verdict v = recsub::subtypeAutomata(env, recsub::automataof(l),
                                        recsub::automataof(r), rel, budget);
    out.kind = v.kind;
    out.witness = v.witness;
    out.promotions = v.promotions;
    out.assertions = v.assertions;
  } else {  // oracle
    recsub::OracleResult o = recsub::oracleCheck(env, {}, l, r, rel, depth);
    out.kind = o.yes ? VerdictKind::Yes : VerdictKind::No;
    out.witness = o.witness;
  }
  out.millis = std::chrono::duration<double, std::milli>(
                   std::chrono::steady_clock::now() - t0)
                   .count();
  return out;
}

int cmdCheck(const recsub::RunConfig& cfg, const std::string& path) {
  recsub::ParsedQueryFile file;
  recsub::GlobalEnv env;
  std::vector<std::pair<Ty, Ty>> cores;
  try {
    file = recsub::parseQueryFile(readFile(path));
    env = recsub::buildEnv(file, cfg.strictFrees);
    if (auto err = recsub::validateEnv(env)) {
      std::cerr << "error: " << err->message() << "\n";
      return 2;
    }
    auto scope = env.names();
    for (const auto& q : file.queries) {
      Ty l = recsub::toCore(q.left, scope);
      Ty r = recsub::toCore(q.right, scope);
      for (const Ty& t : {l, r})
        if (auto err = recsub::wellFormed(t, env)) {
          std::cerr << "error: " << err->message() << "\n";
          return 2;
        }
      cores.emplace_back(std::move(l), std::move(r));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<std::string> engines;
  if (cfg.engine == "all")
    engines = {"coinductive", "automata", "oracle"};
  else
    engines = {cfg.engine};

  bool anyBudget = false, anyMismatch = false;
  json report = json::array();
  for (std::size_t i = 0; i < file.queries.size(); ++i) {
    const recsub::Query& q = file.queries[i];
    for (const auto& engine : engines) {
      EngineResult res = runEngine(engine, env, cores[i].first,
                                   cores[i].second, q.rel, cfg.budget,
                                   cfg.depth);
      bool isYes = res.kind == VerdictKind::Yes;
      if (res.kind == VerdictKind::BudgetExceeded)
        anyBudget = true;
      else if (q.expected.has_value() ? isYes != *q.expected : !isYes)
        anyMismatch = true;
      if (cfg.json) {
        json row;
        row["query"] = q.source;
        row["engine"] = res.engine;
        row["verdict"] = recsub::verdictName(res.kind);
        row["witnessPath"] = recsub::pathToString(res.witness);
        row["promotions"] = res.promotions;
        row["assertions"] = res.assertions;
        row["millis"] = res.millis;
        report.push_back(std::move(row));
      } else {
        std::cout << q.source << "  [" << res.engine
                  << "] " << recsub::verdictName(res.kind);
        if (res.kind == VerdictKind::No && !res.witness.empty())
          std::cout << "  at " << recsub::pathToString(res.witness);
        std::cout << "\n";
      }
    }
  }
  if (cfg.json) std::cout << report.dump(2) << "\n";
  if (anyBudget) return 3;
  return anyMismatch ? 1 : 0;
}

int cmdTree(const recsub::RunConfig& cfg, const std::string& typeText) {
  try {
    recsub::Surf s = recsub::parseType(typeText);
    recsub::GlobalEnv env;
    // Frees act as implicitly declared opaque constants for inspection.
    recsub::Ty probe = toCoreWithImplicits(s, env);
    if (auto err = recsub::wellFormed(probe, env)) {
      std::cerr << "error: " << err->message() << "\n";
      return 2;
    }
    recsub::Tr tree = recsub::treeof(probe, cfg.depth);
    if (cfg.json)
      std::cout << treeToJson(tree).dump(2) << "\n";
    else
      std::cout << recsub::renderTree(tree);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

int cmdAutomaton(const recsub::RunConfig& cfg, const std::string& typeText) {
  try {
    recsub::Surf s = recsub::parseType(typeText);
    recsub::GlobalEnv env;
    recsub::Ty t = toCoreWithImplicits(s, env);
    if (auto err = recsub::wellFormed(t, env)) {
      std::cerr << "error: " << err->message() << "\n";
      return 2;
    }
    recsub::TreeAutomaton a = recsub::automataof(t);
    if (cfg.dot)
      std::cout << recsub::dumpAutomatonDot(a);
    else if (cfg.json)
      std::cout << recsub::dumpAutomatonJson(a) << "\n";
    else
      std::cout << recsub::dumpAutomaton(a);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

json caseToJson(const recsub::GenCase& c) {
  json j;
  j["case"] = recsub::describeCase(c);
  return j;
}

int cmdFuzz(const recsub::RunConfig& cfg) {
  recsub::FuzzReport rep = recsub::runFuzz(cfg.seed, cfg.count, cfg.sizeMax,
                                           cfg.budget, cfg.depth,
                                           cfg.engine != "automata");
  if (cfg.json) {
    json j;
    j["seed"] = cfg.seed;
    j["casesRun"] = rep.casesRun;
    j["budgetExceeded"] = rep.budgetExceededCount;
    j["disagreements"] = json::array();
    for (const auto& d : rep.disagreements) {
      json row;
      row["caseIndex"] = d.caseIndex;
      row["details"] = d.details;
      row["original"] = caseToJson(d.original);
      row["shrunk"] = caseToJson(d.shrunk);
      j["disagreements"].push_back(std::move(row));
    }
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "cases run:       " << rep.casesRun << "\n"
              << "budget exceeded: " << rep.budgetExceededCount << "\n"
              << "disagreements:   " << rep.disagreements.size() << "\n";
    for (const auto& d : rep.disagreements) {
      std::cout << "  case " << d.caseIndex << ": " << d.details << "\n"
                << "    original: " << recsub::describeCase(d.original) << "\n"
                << "    shrunk:   " << recsub::describeCase(d.shrunk) << "\n";
    }
  }
  return rep.disagreements.empty() ? 0 : 1;
}

int cmdBench(const recsub::RunConfig& cfg, std::vector<int> sizes) {
  if (sizes.empty()) sizes = {50, 100, 200, 400};
  recsub::BenchReport rep = recsub::runBench(sizes, cfg.budget);
  if (cfg.json) {
    json j;
    j["rows"] = json::array();
    for (const auto& row : rep.rows) {
      json r;
      r["n"] = row.n;
      r["states"] = row.states;
      r["millis"] = row.millis;
      r["verdict"] = recsub::verdictName(row.verdict);
      r["goals"] = row.goals;
      j["rows"].push_back(std::move(r));
    }
    j["fittedExponent"] = rep.fittedExponent;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "    n   states       ms   goals  verdict\n";
    for (const auto& row : rep.rows) {
      std::printf("%5d %8d %8.2f %7llu  %s\n", row.n, row.states, row.millis,
                  static_cast<unsigned long long>(row.goals),
                  recsub::verdictName(row.verdict));
    }
    std::printf("fitted exponent: %.2f\n", rep.fittedExponent);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "recsub: equality and subtyping of second-order equirecursive types"};
  app.require_subcommand(1);

  recsub::RunConfig cfg;
  std::string queryFile, typeText;
  std::vector<int> benchSizes;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("--budget", cfg.budget, "goal budget per engine run");
    sub->add_option("--depth", cfg.depth, "tree/oracle depth");
    sub->add_flag("--json", cfg.json, "machine-readable output");
  };

  CLI::App* check = app.add_subcommand("check", "run engines on a query file");
  check->add_option("file", queryFile, "query file")->required();
  check->add_option("--engine", cfg.engine,
                    "coinductive | automata | oracle | all")
      ->check(CLI::IsMember({"coinductive", "automata", "oracle", "all"}));
  check->add_flag("--strict-frees,!--no-strict-frees", cfg.strictFrees,
                  "require every free name to be declared");
  addCommon(check);

  CLI::App* tree = app.add_subcommand("tree", "print a depth-bounded unrolling");
  tree->add_option("type", typeText, "type expression")->required();
  addCommon(tree);

  CLI::App* automaton =
      app.add_subcommand("automaton", "print the tree automaton of a type");
  automaton->add_option("type", typeText, "type expression")->required();
  automaton->add_flag("--dot", cfg.dot, "GraphViz output");
  addCommon(automaton);

  CLI::App* fuzz = app.add_subcommand("fuzz", "differential random testing");
  fuzz->add_option("--seed", cfg.seed, "PRNG seed");
  fuzz->add_option("--count", cfg.count, "number of cases")->required();
  fuzz->add_option("--size-max", cfg.sizeMax, "max core size per side");
  fuzz->add_option("--engine", cfg.engine,
                   "all (default) or automata to skip the oracle")
      ->check(CLI::IsMember({"all", "automata"}));
  addCommon(fuzz);

  CLI::App* bench = app.add_subcommand("bench", "automata-engine scaling");
  bench->add_option("--sizes", benchSizes, "family sizes (default 50 100 200 400)");
  addCommon(bench);

  CLI11_PARSE(app, argc, argv);

  if (check->parsed()) return cmdCheck(cfg, queryFile);
  if (tree->parsed()) return cmdTree(cfg, typeText);
  if (automaton->parsed()) return cmdAutomaton(cfg, typeText);
  if (fuzz->parsed()) return cmdFuzz(cfg);
  if (bench->parsed()) return cmdBench(cfg, benchSizes);
  return 0;
}
