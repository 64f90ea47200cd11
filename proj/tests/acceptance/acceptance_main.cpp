// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "bioauth/attacks.hpp"
#include "bioauth/biohash.hpp"
#include "bioauth/dolev_yao/concrete.hpp"
#include "bioauth/dolev_yao/search.hpp"
#include "bioauth/dolev_yao/spec.hpp"
#include "bioauth/metrics.hpp"
#include "cli.hpp"

namespace {

using namespace bioauth;
using Clock = std::chrono::steady_clock;

// Collects failed checks for one criterion.
class Check {
 public:
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& s) { notes_.push_back(s); }
  bool ok() const { return failures_.empty(); }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + ("failed: " + f);
    for (const auto& n : notes_) s += (s.empty() ? "" : "; ") + n;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, const char* spec = "%.4f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void security_matrix(Check& c) {
  const auto start = Clock::now();
  const SystemParams params;
  const SecurityMatrix m = build_security_matrix(params, Rng(params.rng_seed).fork("security"));
  const double elapsed = seconds_since(start);
  for (const auto p : kProperties) {
    const Cell& cell = m.row("proposed").at(p);
    c.require(cell.plus && cell.provenance == Provenance::Executed, "proposed " + to_string(p) + " is +");
  }
  c.require(!m.row("rhls").at(Property::ReplayPrevention).plus, "rhls replay_prevention is -");
  const Cell& ch = m.row("ch").at(Property::ReplayPrevention);
  c.require(!ch.plus && ch.evidence.find("algebraic replay succeeded") != std::string::npos,
            "ch replay_prevention is - via algebraic replay");
  c.require(!m.row("clear_id").at(Property::Untraceability).plus, "clear_id untraceability is -");
  c.require(elapsed < 120.0, "runtime under 2 min");
  c.note("runtime " + fmt(elapsed, "%.1f") + " s");
}

void cost_rows(Check& c) {
  const SystemParams params;
  Rng rng(params.rng_seed);
  const CostReport p = measure_costs("proposed", 100, params, rng);
  c.require(p.tag_hash_ops == 2.0, "proposed 2h");
  c.require(p.storage_units == 2.0, "proposed storage 2l");
  c.require(p.reader_to_tag_units == 0.5, "proposed R->T 1/2l");
  c.require(p.tag_to_reader_units == 2.5, "proposed T->R 2 1/2l");
  c.require(p.total_units == 3.0, "proposed total 3l");
  const CostReport r = measure_costs("rhls", 100, params, rng);
  c.require(r.tag_hash_ops == 1.0, "rhls 1h");
  c.require(r.storage_units == 1.0, "rhls storage 1l");
  c.require(r.tag_to_reader_units == 2.0 && r.total_units == 2.0, "rhls T->R and total 2l");
  c.note("proposed " + p.computation + " " + format_units(p.storage_units) + "l " +
         format_units(p.reader_to_tag_units) + "l " + format_units(p.tag_to_reader_units) + "l " +
         format_units(p.total_units) + "l; rhls " + r.computation + " " + format_units(r.storage_units) + "l " +
         format_units(r.total_units) + "l");
}

void dolev_yao_safety(Check& c) {
  const auto start = Clock::now();
  dy::SearchOptions opts;
  opts.depth = 8;
  opts.term_cap = 64;
  const auto& proposed = dy::builtin_spec("proposed");
  for (int sessions : {2, 3}) {
    const auto r = dy::search_attacks(proposed, dy::scenario_for_sessions(proposed, sessions), opts);
    c.require(!r.attack, "proposed has no attack with " + std::to_string(sessions) + " sessions");
    c.require(!r.incomplete, "proposed search with " + std::to_string(sessions) + " sessions is complete");
    c.note(std::to_string(sessions) + "-session proposed: " + std::to_string(r.states) + " states");
  }
  const auto& rhls = dy::builtin_spec("rhls");
  const auto r = dy::search_attacks(rhls, dy::replay_scenario(rhls), opts);
  c.require(r.attack.has_value(), "rhls replay trace found");
  if (r.attack) {
    c.require(r.attack->events.size() <= 8, "rhls trace within depth 8");
    c.note("rhls trace " + std::to_string(r.attack->events.size()) + " events, goal " + r.attack->goal);
  }
  const double elapsed = seconds_since(start);
  c.require(elapsed < 300.0, "runtime under 5 min");
  c.note("runtime " + fmt(elapsed, "%.1f") + " s");
}

void untraceability(Check& c) {
  const SystemParams params;
  for (const std::string key : {"proposed", "clear_id"}) {
    std::vector<double> adv;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      adv.push_back(trace_game(key, 10000, params, Rng(seed).fork("trace"), 4).advantage);
    }
    double mean = 0;
    for (double a : adv) mean += a / adv.size();
    for (double a : adv) {
      if (key == "proposed") c.require(a <= 0.05, "proposed advantage " + fmt(a) + " <= 0.05");
      else c.require(a >= 0.95, "clear_id advantage " + fmt(a) + " >= 0.95");
      c.require(std::abs(a - mean) <= 0.02, key + " advantage within 0.02 of the 5-seed mean");
    }
    std::string list;
    for (double a : adv) list += (list.empty() ? "" : ",") + fmt(a);
    c.note(key + " advantages [" + list + "]");
  }
}

void completeness_and_robustness(Check& c) {
  SystemParams params;
  std::size_t accepted = 0;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    SystemParams p = params;
    p.rng_seed = seed;
    Rng rng(seed);
    accepted += honest_acceptances("proposed", 1, p, rng);
  }
  c.require(accepted == 1000, "1000/1000 honest sessions accepted (got " + std::to_string(accepted) + ")");

  Rng desync_rng(params.rng_seed);
  const auto desync = desync_report("proposed", kAllInterruptPoints, params, desync_rng);
  c.require(desync.ok, "desync recovery at all 5 interruption points");

  params.n = 8;
  Rng dos_rng(params.rng_seed);
  const auto dos = dos_flood("proposed", 10000, params, dos_rng);
  c.require(dos.ok && dos.honest_accepted, "honest session succeeds after 10000 bogus sessions");
  c.require(dos.min_server_hashes == params.n && dos.max_server_hashes == params.n,
            "each bogus session costs exactly n server hashes");
  c.require(dos.state_unchanged, "persistent state byte-identical");
  c.note("1000/1000 accepted; dos server hashes " + std::to_string(dos.min_server_hashes) + ".." +
         std::to_string(dos.max_server_hashes) + " with n=" + std::to_string(params.n));
}

void algebraic_cross_check(Check& c) {
  const SystemParams params;
  std::size_t traces = 0, mismatches = 0;
  bool rhls_found = false, ch_found = false;
  for (const std::string key : {"proposed", "rhls", "ch"}) {
    const auto& spec = dy::builtin_spec(key, params.l);
    for (int sessions : {2, 3}) {
      const auto scenario = dy::scenario_for_sessions(spec, sessions);
      const auto r = dy::search_attacks(spec, scenario);
      if (!r.attack) continue;
      ++traces;
      Rng rng = Rng(params.rng_seed).fork("cross-check/" + key, static_cast<std::uint64_t>(sessions));
      const auto replay = dy::replay_concretely(key, spec, scenario, *r.attack, params, rng);
      if (!replay.replayed || !replay.violation_confirmed) {
        ++mismatches;
        c.require(false, key + " " + std::to_string(sessions) + "-session trace replays concretely");
      }
      if (key == "rhls" && sessions == 2) rhls_found = true;
      if (key == "ch" && sessions == 2) ch_found = true;
    }
  }
  // The scripted attacks must succeed concretely for the rediscovery to mean anything.
  Rng rng(params.rng_seed);
  c.require(replay_attack("rhls", params, rng).succeeded, "scripted rhls replay succeeds");
  c.require(ch_algebraic_replay(params, rng).succeeded, "scripted ch algebraic replay succeeds");
  c.require(rhls_found, "rhls replay rediscovered symbolically");
  c.require(ch_found, "ch algebraic replay rediscovered symbolically");
  c.note(std::to_string(traces) + " symbolic traces, " + std::to_string(mismatches) + " mismatches");
}

void biometric_layer(Check& c) {
  const SystemParams params;
  const Rng rng = Rng(params.rng_seed).fork("biometric-acceptance");
  const auto zero = estimate_error_rates(500, 0.0, params.epsilon, params, rng);
  c.require(zero.frr == 0.0, "FRR = 0 at zero noise");
  const std::vector<std::size_t> eps = {5, 12, 19, 40, 60};
  for (double sigma : {params.noise_sigma, 0.5}) {
    const auto rates = error_rate_sweep(500, sigma, eps, params, rng);
    for (std::size_t i = 1; i < rates.size(); ++i) {
      c.require(rates[i].frr <= rates[i - 1].frr, "FRR non-increasing in epsilon");
      c.require(rates[i].far >= rates[i - 1].far, "FAR non-decreasing in epsilon");
    }
  }
  const auto def = estimate_error_rates(500, params.noise_sigma, params.epsilon, params, rng);
  c.require(def.far < 0.01, "default FAR < 0.01");
  c.require(def.frr < 0.05, "default FRR < 0.05");
  c.note("default FAR=" + fmt(def.far, "%.6f") + " FRR=" + fmt(def.frr, "%.6f"));
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void determinism(Check& c) {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "bioauth-acceptance-determinism";
  fs::remove_all(root);
  // Each run gets its own directory; file names inside are identical.
  auto commands = [](const fs::path& d) -> std::vector<std::vector<std::string>> {
    const std::string db = (d / "enrolment.db").string();
    return {
        {"register", "--count", "8", "--seed", "5", "--out", db},
        {"auth", "--db", db, "--tag-index", "3", "--seed", "5", "--out", (d / "auth.jsonl").string()},
        {"attack", "replay", "--protocol", "rhls", "--seed", "5", "--out", (d / "replay.jsonl").string()},
        {"attack", "mitm", "--protocol", "proposed", "--seed", "5", "--out", (d / "mitm.jsonl").string()},
        {"attack", "trace", "--protocol", "proposed", "--trials", "2000", "--jobs", "3", "--seed", "5"},
        {"attack", "dy-search", "--protocol", "ch", "--sessions", "2", "--seed", "5", "--out",
         (d / "dy.txt").string()},
        {"tables", "--trials", "1000", "--seed", "5", "--out", (d / "tables").string()},
    };
  };
  std::vector<std::string> stdout_runs[2];
  for (int run = 0; run < 2; ++run) {
    const fs::path d = root / "same";
    fs::remove_all(d);
    fs::create_directories(d);
    for (const auto& args : commands(d)) {
      std::ostringstream out, err;
      cli::run(args, out, err);
      stdout_runs[run].push_back(out.str());
    }
    fs::rename(d, root / ("run" + std::to_string(run)));
  }
  c.require(stdout_runs[0] == stdout_runs[1], "stdout identical across reruns");
  std::size_t files = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "run0")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root / "run0");
    const std::string a = slurp(entry.path());
    c.require(!a.empty(), rel.string() + " is non-empty");
    c.require(a == slurp(root / "run1" / rel), rel.string() + " byte-identical");
    ++files;
  }
  c.require(files >= 10, "all output files produced");
  c.note(std::to_string(files) + " files and " + std::to_string(stdout_runs[0].size()) + " stdout streams compared");
  fs::remove_all(root);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"security matrix matches the executed subset", security_matrix},
      {"cost table in units of l", cost_rows},
      {"bounded symbolic search", dolev_yao_safety},
      {"untraceability game", untraceability},
      {"completeness and robustness", completeness_and_robustness},
      {"symbolic and concrete attacks agree", algebraic_cross_check},
      {"biometric layer", biometric_layer},
      {"CLI determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check check;
    try {
      criteria[i].second(check);
    } catch (const std::exception& e) {
      check.require(false, std::string("exception: ") + e.what());
    }
    failed += check.ok() ? 0 : 1;
    std::cout << (check.ok() ? "PASS" : "FAIL") << " criterion " << (i + 1) << ": " << criteria[i].first << " ("
              << check.summary() << ")" << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
