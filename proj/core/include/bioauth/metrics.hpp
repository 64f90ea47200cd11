#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bioauth/params.hpp"
#include "bioauth/rng.hpp"

namespace bioauth {

enum class Source { Measured, Paper };
std::string to_string(Source s);

// Per-session tag costs. Communication follows the convention that the
// reader's opening challenge is not counted towards reader-to-tag traffic
// while every tag-sent field is; raw totals include the challenge.
struct CostReport {
  std::string protocol;
  // Hash evaluations on the tag per session. Unset for rows whose
  // computation unit is not a hash.
  std::optional<double> tag_hash_ops;
  // Computation cost as printed in the reference table ("2h", "1g").
  std::string computation;
  double storage_units = 0;  // multiples of l
  std::uint64_t reader_to_tag_bits = 0;
  std::uint64_t tag_to_reader_bits = 0;
  std::uint64_t reader_to_tag_raw_bits = 0;
  double reader_to_tag_units = 0;
  double tag_to_reader_units = 0;
  double total_units = 0;
  std::size_t l = 0;
  Source source = Source::Measured;
};

// Honest sessions against one enrolled population with per-party counters.
// Throws NotExecutable for protocols known only from reference data and
// Error when the per-session counts are not constant.
CostReport measure_costs(const std::string& protocol_key, std::size_t sessions, const SystemParams& params,
                         Rng& rng);

// Reference rows of the published cost comparison, in its order.
const std::vector<CostReport>& reference_costs();
std::optional<CostReport> reference_cost(const std::string& protocol);

// Measured rows for every implemented protocol plus reference-only rows, in
// the published order with the clear-ID calibration protocol last.
std::vector<CostReport> cost_table(const SystemParams& params, std::size_t sessions, Rng& rng);

enum class Property { MutualAuth, ReplayPrevention, Untraceability, DosPrevention, DesyncResistance };
inline constexpr std::array<Property, 5> kProperties = {Property::MutualAuth, Property::ReplayPrevention,
                                                        Property::Untraceability, Property::DosPrevention,
                                                        Property::DesyncResistance};
std::string to_string(Property p);

enum class Provenance { Executed, Paper };
std::string to_string(Provenance p);

struct Cell {
  bool plus = false;
  Provenance provenance = Provenance::Executed;
  // The published mark, when the protocol appears in the reference table.
  std::optional<bool> reference;
  // What the cell was computed from, e.g. "advantage=0.004".
  std::string evidence;

  bool agrees_with_reference() const { return !reference || *reference == plus; }
};

struct SecurityRow {
  std::string protocol;
  std::array<Cell, kProperties.size()> cells;

  const Cell& at(Property p) const { return cells[static_cast<std::size_t>(p)]; }
  Cell& at(Property p) { return cells[static_cast<std::size_t>(p)]; }
};

struct SecurityMatrix {
  std::vector<SecurityRow> rows;
  // Throws ConfigError for a protocol not in the matrix.
  const SecurityRow& row(const std::string& protocol) const;
};

struct MatrixOptions {
  std::size_t honest_sessions = 100;
  std::size_t trace_trials = 10000;
  double trace_threshold = 0.05;  // "+" iff advantage <= threshold
  std::size_t dos_sessions = 1000;
  unsigned jobs = 1;
};

// Published security marks for a protocol, in kProperties order.
std::optional<std::array<bool, kProperties.size()>> reference_marks(const std::string& protocol);

// Runs the games for every implemented protocol and fills reference-only
// rows from published marks. Each cell draws from its own substream of `rng`.
SecurityMatrix build_security_matrix(const SystemParams& params, const Rng& rng, const MatrixOptions& options = {});

// Mark of one executed cell, recomputed from its game.
Cell executed_cell(const std::string& protocol, Property property, const SystemParams& params, const Rng& rng,
                   const MatrixOptions& options = {});

// Long format: protocol,property,mark,provenance,reference,agrees,evidence.
std::string table1_csv(const SecurityMatrix& m);
std::string table1_json(const SecurityMatrix& m);
std::string table1_markdown(const SecurityMatrix& m);

// protocol,computation,storage,r_to_t,t_to_r,total (l-units), then raw bit
// counts, the printed computation cost and the row source.
std::string table2_csv(const std::vector<CostReport>& rows);
std::string table2_json(const std::vector<CostReport>& rows);
std::string table2_markdown(const std::vector<CostReport>& rows);

// Shortest decimal form: 2, 0.5, 2.5.
std::string format_units(double v);

}  // namespace bioauth
