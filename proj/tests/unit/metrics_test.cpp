#include <gtest/gtest.h>
#include <json.hpp>

#include "bioauth/attacks.hpp"
#include "bioauth/errors.hpp"
#include "bioauth/metrics.hpp"

namespace bioauth {
namespace {

TEST(CostTest, ProposedRowInUnitsOfL) {
  const SystemParams params;
  Rng rng(1);
  const CostReport r = measure_costs("proposed", 50, params, rng);
  EXPECT_EQ(r.tag_hash_ops, 2.0);
  EXPECT_EQ(r.computation, "2h");
  EXPECT_EQ(r.storage_units, 2.0);
  EXPECT_EQ(r.reader_to_tag_units, 0.5);
  EXPECT_EQ(r.tag_to_reader_units, 2.5);
  EXPECT_EQ(r.total_units, 3.0);
  EXPECT_EQ(r.tag_to_reader_bits, 320u);
  EXPECT_EQ(r.reader_to_tag_bits, 64u);
  EXPECT_EQ(r.reader_to_tag_raw_bits, 192u);
  EXPECT_EQ(r.source, Source::Measured);
}

TEST(CostTest, BaselineRows) {
  const SystemParams params;
  Rng rng(2);
  const CostReport rhls = measure_costs("rhls", 20, params, rng);
  EXPECT_EQ(rhls.tag_hash_ops, 1.0);
  EXPECT_EQ(rhls.storage_units, 1.0);
  EXPECT_EQ(rhls.reader_to_tag_units, 0.0);
  EXPECT_EQ(rhls.tag_to_reader_units, 2.0);
  EXPECT_EQ(rhls.total_units, 2.0);
  const CostReport ch = measure_costs("ch", 20, params, rng);
  EXPECT_EQ(ch.storage_units, 2.0);
  EXPECT_EQ(ch.reader_to_tag_units, 0.5);
  EXPECT_EQ(ch.tag_to_reader_units, 1.5);
  EXPECT_EQ(ch.total_units, 2.0);
}

TEST(CostTest, CountsDoNotDependOnSeedOrWidth) {
  for (std::uint64_t seed : {3, 4, 5}) {
    for (std::size_t l : {64, 256}) {
      const SystemParams params = SystemParams::for_width(l);
      Rng rng(seed);
      const CostReport r = measure_costs("proposed", 10, params, rng);
      EXPECT_EQ(r.total_units, 3.0);
      EXPECT_EQ(r.tag_to_reader_bits, 5 * l / 2);
      EXPECT_EQ(r.reader_to_tag_units + r.tag_to_reader_units, r.total_units);
    }
  }
}

TEST(CostTest, ReferenceOnlyProtocolsAreNotExecutable) {
  const SystemParams params;
  Rng rng(6);
  EXPECT_THROW(measure_costs("lcap", 10, params, rng), NotExecutable);
  EXPECT_THROW(measure_costs("smartcard_a", 10, params, rng), NotExecutable);
  ASSERT_TRUE(reference_cost("lhyc"));
  EXPECT_EQ(reference_cost("lhyc")->source, Source::Paper);
}

TEST(CostTest, TableKeepsReferenceOrderWithCalibrationLast) {
  const SystemParams params;
  Rng rng(7);
  const auto rows = cost_table(params, 10, rng);
  ASSERT_EQ(rows.size(), reference_costs().size() + 1);
  for (std::size_t i = 0; i < reference_costs().size(); ++i) EXPECT_EQ(rows[i].protocol, reference_costs()[i].protocol);
  EXPECT_EQ(rows.back().protocol, "clear_id");
  for (const auto& r : rows) {
    const bool measured = r.protocol == "proposed" || r.protocol == "rhls" || r.protocol == "ch" || r.protocol == "clear_id";
    EXPECT_EQ(r.source, measured ? Source::Measured : Source::Paper) << r.protocol;
  }
  const std::string csv = table2_csv(rows);
  EXPECT_NE(csv.find("\nproposed,2,2,0.5,2.5,3,64,320,192,2h,measured\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\nrhls,1,1,0,2,2,"), std::string::npos) << csv;
  EXPECT_TRUE(nlohmann::json::accept(table2_json(rows)));
  EXPECT_NE(table2_markdown(rows).find("| Proposed | 2h | 2l | 1/2l | 2 1/2l | 3l | measured |"), std::string::npos);
}

TEST(CostTest, UnitFormatting) {
  EXPECT_EQ(format_units(2.0), "2");
  EXPECT_EQ(format_units(0.5), "0.5");
  EXPECT_EQ(format_units(2.5), "2.5");
}

MatrixOptions quick() {
  MatrixOptions o;
  o.honest_sessions = 20;
  o.trace_trials = 2000;
  o.dos_sessions = 100;
  o.trace_threshold = 0.1;
  return o;
}

TEST(MatrixTest, ExecutedCellsEqualTheirGames) {
  const SystemParams params;
  const Rng rng(8);
  const auto opts = quick();
  const SecurityMatrix m = build_security_matrix(params, rng, opts);
  for (const auto& row : m.rows) {
    for (const auto p : kProperties) {
      const Cell& c = row.at(p);
      if (c.provenance != Provenance::Executed) continue;
      const Cell again = executed_cell(row.protocol, p, params, rng, opts);
      EXPECT_EQ(c.plus, again.plus) << row.protocol << " " << to_string(p);
      EXPECT_EQ(c.evidence, again.evidence);
    }
  }
  // Cross-check a few cells against the games run directly on the same substreams.
  Rng replay_rng = rng.fork("rhls/replay_prevention");
  EXPECT_EQ(m.row("rhls").at(Property::ReplayPrevention).plus, !replay_attack("rhls", params, replay_rng).succeeded);
  const auto game = trace_game("proposed", opts.trace_trials, params, rng.fork("proposed/untraceability"));
  EXPECT_EQ(m.row("proposed").at(Property::Untraceability).plus, game.advantage <= opts.trace_threshold);
}

TEST(MatrixTest, HeadlineCells) {
  const SystemParams params;
  const SecurityMatrix m = build_security_matrix(params, Rng(9), quick());
  for (const auto p : kProperties) {
    EXPECT_TRUE(m.row("proposed").at(p).plus) << to_string(p);
    EXPECT_EQ(m.row("proposed").at(p).provenance, Provenance::Executed);
  }
  EXPECT_FALSE(m.row("rhls").at(Property::ReplayPrevention).plus);
  EXPECT_FALSE(m.row("ch").at(Property::ReplayPrevention).plus);
  EXPECT_FALSE(m.row("clear_id").at(Property::Untraceability).plus);
  for (const auto p : kProperties) EXPECT_EQ(m.row("lhyc").at(p).provenance, Provenance::Paper);
  EXPECT_EQ(m.row("rhls").at(Property::Untraceability).provenance, Provenance::Paper);
  EXPECT_THROW(m.row("nope"), ConfigError);
}

TEST(MatrixTest, RenderingsCarryProvenance) {
  const SystemParams params;
  const SecurityMatrix m = build_security_matrix(params, Rng(10), quick());
  const std::string csv = table1_csv(m);
  EXPECT_EQ(csv.rfind("protocol,property,mark,provenance,reference,agrees,evidence\n", 0), 0u);
  EXPECT_NE(csv.find("proposed,replay_prevention,+,executed,+,yes,"), std::string::npos);
  EXPECT_NE(csv.find("lcap,dos_prevention,-,paper,-,yes,"), std::string::npos);
  const auto j = nlohmann::json::parse(table1_json(m));
  EXPECT_EQ(j["rows"].size(), 6u);
  EXPECT_NE(table1_markdown(m).find("| mutual_auth |"), std::string::npos);
}

}  // namespace
}  // namespace bioauth
