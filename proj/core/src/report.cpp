#include "pfa/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "pfa/bp_algebra.hpp"

namespace pfa {

namespace {

using ordered_json = nlohmann::ordered_json;

// JSON has no infinity literal; bounds that can be infinite round-trip
// through the string "inf".
ordered_json bound_to_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double bound_from_json(const ordered_json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

ordered_json vector_to_json(const Eigen::VectorXcd& v) {
  ordered_json out = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(ordered_json::array({v(i).real(), v(i).imag()}));
  return out;
}

Eigen::VectorXcd vector_from_json(const ordered_json& j) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j)
    v(i++) = std::complex<double>(e.at(0).get<double>(),
                                  e.at(1).get<double>());
  return v;
}

// Matrices carry explicit shape so degenerate sizes (m x 0 null bases)
// survive the round trip.
ordered_json matrix_to_json(const Eigen::MatrixXcd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back(ordered_json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  ordered_json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  out["data"] = std::move(rows);
  return out;
}

Eigen::MatrixXcd matrix_from_json(const ordered_json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  Eigen::MatrixXcd m(rows, cols);
  const ordered_json& data = j.at("data");
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& cell = data.at(static_cast<std::size_t>(i))
                             .at(static_cast<std::size_t>(c));
      m(i, c) = std::complex<double>(cell.at(0).get<double>(),
                                     cell.at(1).get<double>());
    }
  return m;
}

UpperKind upper_kind_from_string(const std::string& s) {
  if (s == "exact") return UpperKind::exact;
  if (s == "riesz_thorin") return UpperKind::riesz_thorin;
  if (s == "holder_columns") return UpperKind::holder_columns;
  if (s == "grid_slack") return UpperKind::grid_slack;
  if (s == "consensus") return UpperKind::consensus;
  if (s == "inherited") return UpperKind::inherited;
  return UpperKind::none;
}

NormMethod method_from_string(const std::string& s) {
  if (s == "svd") return NormMethod::svd;
  if (s == "boyd_multistart") return NormMethod::boyd_multistart;
  if (s == "brute_force") return NormMethod::brute_force;
  if (s == "riesz_thorin") return NormMethod::riesz_thorin;
  return NormMethod::closed_form;
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "PASS") return Verdict::PASS;
  if (s == "FAIL") return Verdict::FAIL;
  return Verdict::INCONCLUSIVE;
}

ordered_json space_to_json(const SpacePtr& space) {
  ordered_json out;
  out["p"] = space->p();
  out["S"] = matrix_to_json(space->basis());
  out["N"] = matrix_to_json(space->null_basis());
  out["ambient"] = space->ambient_dim();
  return out;
}

SpacePtr space_from_json(const ordered_json& j) {
  double p = j.at("p").get<double>();
  Eigen::MatrixXcd S = matrix_from_json(j.at("S"));
  Eigen::MatrixXcd N = matrix_from_json(j.at("N"));
  if (N.cols() == 0) return QSLpSpace::subspace(std::move(S), p);
  return QSLpSpace::quotient(std::move(S), std::move(N), p);
}

}  // namespace

ordered_json to_json(const NormEstimate& est) {
  ordered_json out;
  out["lower"] = bound_to_json(est.lower);
  out["upper"] = bound_to_json(est.upper);
  out["upper_certified"] = est.upper_certified;
  out["upper_kind"] = to_string(est.upper_kind);
  out["certified_upper"] = bound_to_json(est.certified_upper);
  out["method"] = to_string(est.method);
  out["iterations"] = est.iterations;
  out["converged"] = est.converged;
  out["witness"] = vector_to_json(est.witness);
  return out;
}

NormEstimate estimate_from_json(const ordered_json& j) {
  NormEstimate est;
  est.lower = bound_from_json(j.at("lower"));
  est.upper = bound_from_json(j.at("upper"));
  est.upper_certified = j.at("upper_certified").get<bool>();
  est.upper_kind = upper_kind_from_string(j.at("upper_kind").get<std::string>());
  est.certified_upper = bound_from_json(j.at("certified_upper"));
  est.method = method_from_string(j.at("method").get<std::string>());
  est.iterations = j.at("iterations").get<int>();
  est.converged = j.at("converged").get<bool>();
  est.witness = vector_from_json(j.at("witness"));
  return est;
}

ordered_json to_json(const ReportRecord& rec) {
  ordered_json out;
  out["suite"] = rec.suite;
  out["check"] = rec.check_id;
  out["instance"] = rec.instance_hash;
  out["relation"] = rec.outcome.relation;
  out["verdict"] = to_string(rec.outcome.verdict);
  out["tolerance"] = rec.outcome.tolerance;
  out["gap_gate"] = rec.outcome.gap_gate;
  out["discrepancy"] = rec.outcome.discrepancy;
  out["lhs"] = to_json(rec.outcome.lhs);
  out["rhs"] = to_json(rec.outcome.rhs);
  out["lhs_replay"] = rec.lhs_replay;
  out["rhs_replay"] = rec.rhs_replay;
  return out;
}

ReportRecord record_from_json(const ordered_json& j) {
  ReportRecord rec;
  rec.suite = j.at("suite").get<std::string>();
  rec.check_id = j.at("check").get<std::string>();
  rec.instance_hash = j.at("instance").get<std::uint64_t>();
  rec.outcome.relation = j.at("relation").get<std::string>();
  rec.outcome.verdict = verdict_from_string(j.at("verdict").get<std::string>());
  rec.outcome.tolerance = j.at("tolerance").get<double>();
  rec.outcome.gap_gate = j.at("gap_gate").get<double>();
  rec.outcome.discrepancy = j.at("discrepancy").get<double>();
  rec.outcome.lhs = estimate_from_json(j.at("lhs"));
  rec.outcome.rhs = estimate_from_json(j.at("rhs"));
  rec.lhs_replay = j.at("lhs_replay");
  rec.rhs_replay = j.at("rhs_replay");
  return rec;
}

ordered_json replay_opnorm(const Eigen::MatrixXcd& matrix,
                           const SpacePtr& dom, const SpacePtr& cod) {
  ordered_json out;
  out["kind"] = "opnorm";
  out["matrix"] = matrix_to_json(matrix);
  out["dom"] = space_to_json(dom);
  out["cod"] = space_to_json(cod);
  return out;
}

ordered_json replay_pairing_ratio(const Eigen::VectorXcd& f,
                                  const Eigen::VectorXcd& u,
                                  double den_upper) {
  ordered_json out;
  out["kind"] = "pairing_ratio";
  out["f"] = vector_to_json(f);
  out["u"] = vector_to_json(u);
  out["den_upper"] = bound_to_json(den_upper);
  return out;
}

ordered_json replay_fourier_p2(const Eigen::VectorXcd& u,
                               const GroupPtr& group) {
  ordered_json out;
  out["kind"] = "fourier_p2";
  out["u"] = vector_to_json(u);
  ordered_json table = ordered_json::array();
  for (int a = 0; a < group->order(); ++a) {
    ordered_json row = ordered_json::array();
    for (int b = 0; b < group->order(); ++b) row.push_back(group->mul(a, b));
    table.push_back(std::move(row));
  }
  out["mul"] = std::move(table);
  return out;
}

ordered_json replay_const() {
  ordered_json out;
  out["kind"] = "const";
  return out;
}

ordered_json replay_product(
    const std::vector<std::pair<NormEstimate, ordered_json>>& factors) {
  ordered_json out;
  out["kind"] = "product";
  ordered_json list = ordered_json::array();
  for (const auto& [est, payload] : factors) {
    ordered_json f;
    f["est"] = to_json(est);
    f["replay"] = payload;
    list.push_back(std::move(f));
  }
  out["factors"] = std::move(list);
  return out;
}

ordered_json replay_shifted(const NormEstimate& inner,
                            const ordered_json& inner_replay, double delta) {
  ordered_json out;
  out["kind"] = "shifted";
  out["delta"] = delta;
  out["inner_est"] = to_json(inner);
  out["inner_replay"] = inner_replay;
  return out;
}

namespace {

// Recomputes the witness-certified value of one payload and checks it
// against the recorded lower bound at every nesting level.
double replay_value(const ordered_json& payload, const NormEstimate& est,
                    const char* side) {
  const std::string kind = payload.at("kind").get<std::string>();
  if (kind == "const") return est.lower;

  double recomputed;
  if (kind == "opnorm") {
    Eigen::VectorXcd witness = payload.contains("witness")
                                   ? vector_from_json(payload.at("witness"))
                                   : est.witness;
    if (witness.size() == 0)
      throw WitnessMissingError(std::string(side) +
                                ": opnorm payload has no stored witness");
    Eigen::MatrixXcd A = matrix_from_json(payload.at("matrix"));
    SpacePtr dom = space_from_json(payload.at("dom"));
    SpacePtr cod = space_from_json(payload.at("cod"));
    recomputed = ratio_at(A, dom, cod, witness);
  } else if (kind == "pairing_ratio") {
    Eigen::VectorXcd f = vector_from_json(payload.at("f"));
    if (f.size() == 0)
      throw WitnessMissingError(std::string(side) +
                                ": pairing payload has no stored witness");
    Eigen::VectorXcd u = vector_from_json(payload.at("u"));
    double den = bound_from_json(payload.at("den_upper"));
    recomputed =
        den > 0.0 ? std::abs((f.array() * u.array()).sum()) / den : 0.0;
  } else if (kind == "fourier_p2") {
    Eigen::VectorXcd u = vector_from_json(payload.at("u"));
    std::vector<std::vector<int>> table;
    for (const auto& row : payload.at("mul"))
      table.push_back(row.get<std::vector<int>>());
    GroupPtr group = FiniteGroup::from_table(std::move(table));
    recomputed = fourier_oracle_p2(bp_from_values(group, u));
  } else if (kind == "product") {
    recomputed = 1.0;
    for (const auto& f : payload.at("factors"))
      recomputed *=
          replay_value(f.at("replay"), estimate_from_json(f.at("est")), side);
  } else if (kind == "shifted") {
    recomputed = replay_value(payload.at("inner_replay"),
                              estimate_from_json(payload.at("inner_est")),
                              side) +
                 payload.at("delta").get<double>();
  } else {
    throw ReplayMismatchError("unknown replay payload kind: " + kind);
  }

  double drift = std::abs(recomputed - est.lower);
  if (drift > 1e-7 * std::max(1.0, std::abs(est.lower)))
    throw ReplayMismatchError(std::string(side) + ": recomputed value " +
                              std::to_string(recomputed) +
                              " drifts from recorded " +
                              std::to_string(est.lower));
  return recomputed;
}

}  // namespace

ReplayResult replay_record(const ReportRecord& rec) {
  ReplayResult out;
  out.lhs_drift = std::abs(replay_value(rec.lhs_replay, rec.outcome.lhs, "lhs") -
                           rec.outcome.lhs.lower);
  out.rhs_drift = std::abs(replay_value(rec.rhs_replay, rec.outcome.rhs, "rhs") -
                           rec.outcome.rhs.lower);

  CheckOutcome fresh =
      rec.outcome.relation == "eq"
          ? check_equal(rec.outcome.lhs, rec.outcome.rhs, rec.outcome.tolerance,
                        rec.outcome.gap_gate)
          : check_leq(rec.outcome.lhs, rec.outcome.rhs, rec.outcome.tolerance,
                      rec.outcome.gap_gate);
  if (fresh.verdict != rec.outcome.verdict)
    throw ReplayMismatchError(std::string("verdict drift: recorded ") +
                              to_string(rec.outcome.verdict) +
                              ", recomputed " + to_string(fresh.verdict));
  out.verdict = fresh.verdict;
  return out;
}

std::string render_canonical_report(const std::vector<ReportRecord>& records,
                                    std::uint64_t seed,
                                    std::uint64_t config_hash) {
  ordered_json root;
  root["version"] = 1;
  root["seed"] = seed;
  root["config_hash"] = config_hash;
  int pass = 0, fail = 0, inconclusive = 0;
  for (const auto& rec : records) {
    switch (rec.outcome.verdict) {
      case Verdict::PASS: ++pass; break;
      case Verdict::FAIL: ++fail; break;
      case Verdict::INCONCLUSIVE: ++inconclusive; break;
    }
  }
  root["summary"] = {{"pass", pass},
                     {"fail", fail},
                     {"inconclusive", inconclusive}};
  ordered_json recs = ordered_json::array();
  for (const auto& rec : records) recs.push_back(to_json(rec));
  root["records"] = std::move(recs);
  return root.dump(2) + "\n";
}

std::string render_table(const std::vector<ReportRecord>& records) {
  std::ostringstream os;
  os << std::left << std::setw(20) << "suite" << std::setw(34) << "check"
     << std::setw(14) << "verdict" << std::right << std::setw(14) << "lhs"
     << std::setw(14) << "rhs" << std::setw(11) << "tol" << std::setw(10)
     << "ms" << '\n';
  os << std::string(117, '-') << '\n';
  for (const auto& rec : records) {
    os << std::left << std::setw(20) << rec.suite << std::setw(34)
       << rec.check_id << std::setw(14) << to_string(rec.outcome.verdict)
       << std::right << std::fixed << std::setprecision(6) << std::setw(14)
       << rec.outcome.lhs.lower << std::setw(14) << rec.outcome.rhs.lower
       << std::scientific << std::setprecision(1) << std::setw(11)
       << rec.outcome.tolerance << std::fixed << std::setprecision(1)
       << std::setw(10) << rec.wall_seconds * 1e3 << '\n';
    os.unsetf(std::ios::floatfield);
  }
  return os.str();
}

}  // namespace pfa
