#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pfa/check.hpp"
#include "pfa/finite_group.hpp"
#include "pfa/opnorm.hpp"

namespace pfa {

// One check instance, with enough payload to re-evaluate the certified
// side of every bound from its stored witness without re-running solvers.
// The replay payload of each side is one of:
//   {"kind": "opnorm",  "matrix", "dom", "cod"}  lower = ratio at witness
//   {"kind": "pairing_ratio", "f", "u", "den_upper"}  lower = |<f,u>|/den
//   {"kind": "fourier_p2", "u", "mul"}  recomputed from the mult table
//   {"kind": "const"}  value checked verbatim
struct ReportRecord {
  std::string suite;
  std::string check_id;
  std::uint64_t instance_hash = 0;
  CheckOutcome outcome;
  nlohmann::ordered_json lhs_replay;
  nlohmann::ordered_json rhs_replay;
  double wall_seconds = 0.0;  // human table only, kept out of canonical json
};

nlohmann::ordered_json to_json(const NormEstimate& est);
NormEstimate estimate_from_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json to_json(const ReportRecord& rec);
ReportRecord record_from_json(const nlohmann::ordered_json& j);

// Replay payload builders.
nlohmann::ordered_json replay_opnorm(const Eigen::MatrixXcd& matrix,
                                     const SpacePtr& dom, const SpacePtr& cod);
nlohmann::ordered_json replay_pairing_ratio(const Eigen::VectorXcd& f,
                                            const Eigen::VectorXcd& u,
                                            double den_upper);
nlohmann::ordered_json replay_fourier_p2(const Eigen::VectorXcd& u,
                                         const GroupPtr& group);
nlohmann::ordered_json replay_const();
nlohmann::ordered_json replay_product(
    const std::vector<std::pair<NormEstimate, nlohmann::ordered_json>>&
        factors);
nlohmann::ordered_json replay_shifted(const NormEstimate& inner,
                                      const nlohmann::ordered_json& inner_replay,
                                      double delta);

struct ReplayResult {
  Verdict verdict = Verdict::INCONCLUSIVE;
  double lhs_drift = 0.0;
  double rhs_drift = 0.0;
};

// Re-derives witness-certified values from the stored payloads, compares
// them against the recorded bounds, and re-evaluates the verdict. Throws
// WitnessMissingError when a payload lacks its witness and
// ReplayMismatchError when a recomputed value drifts beyond 1e-7.
ReplayResult replay_record(const ReportRecord& rec);

// Canonical structured report: deterministic bytes for a fixed run.
std::string render_canonical_report(const std::vector<ReportRecord>& records,
                                    std::uint64_t seed,
                                    std::uint64_t config_hash);

// Aligned human-readable table, wall clock included.
std::string render_table(const std::vector<ReportRecord>& records);

}  // namespace pfa
