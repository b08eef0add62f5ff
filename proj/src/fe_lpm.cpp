#include "distconv/fe_lpm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "distconv/errors.hpp"

namespace distconv {

DemeanedDesign within_demean(const Eigen::MatrixXd& columns,
                             std::span<const std::string> families) {
  const auto n = static_cast<std::size_t>(columns.rows());
  if (families.size() != n) throw ValidationError("family vector length differs from row count");

  std::unordered_map<std::string, int> index;
  std::vector<std::string> order;
  std::vector<int> fam(n);
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = index.emplace(families[i], static_cast<int>(order.size()));
    if (inserted) {
      order.push_back(families[i]);
      counts.push_back(0);
    }
    fam[i] = it->second;
    counts[static_cast<std::size_t>(it->second)]++;
  }

  DemeanedDesign out;
  std::vector<int> compact(order.size(), -1);
  for (std::size_t g = 0; g < order.size(); ++g) {
    if (counts[g] >= 2) {
      compact[g] = static_cast<int>(out.families.size());
      out.families.push_back(order[g]);
    } else {
      out.dropped_families.push_back(order[g]);
    }
  }
  if (out.families.empty()) throw EstimationError("no family has two or more rows");

  for (std::size_t i = 0; i < n; ++i) {
    const int c = compact[static_cast<std::size_t>(fam[i])];
    if (c >= 0) {
      out.rows.push_back(i);
      out.cluster.push_back(c);
    }
  }

  const auto p = columns.cols();
  const auto g_count = static_cast<Eigen::Index>(out.families.size());
  out.family_means = Eigen::MatrixXd::Zero(g_count, p);
  Eigen::VectorXd sizes = Eigen::VectorXd::Zero(g_count);
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    out.family_means.row(out.cluster[r]) += columns.row(static_cast<Eigen::Index>(out.rows[r]));
    sizes(out.cluster[r]) += 1.0;
  }
  for (Eigen::Index g = 0; g < g_count; ++g) out.family_means.row(g) /= sizes(g);

  out.values.resize(static_cast<Eigen::Index>(out.rows.size()), p);
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    out.values.row(static_cast<Eigen::Index>(r)) =
        columns.row(static_cast<Eigen::Index>(out.rows[r])) - out.family_means.row(out.cluster[r]);
  }

  out.degenerate.resize(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    double scale = 1.0;
    for (auto i : out.rows) scale = std::max(scale, std::abs(columns(static_cast<Eigen::Index>(i), j)));
    out.degenerate[static_cast<std::size_t>(j)] = out.values.col(j).cwiseAbs().maxCoeff() <= 1e-12 * scale;
  }
  return out;
}

std::vector<bool> retained_columns(const Eigen::MatrixXd& x, double tol) {
  const auto p = x.cols();
  std::vector<bool> keep(static_cast<std::size_t>(p), false);
  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) max_norm = std::max(max_norm, x.col(j).norm());
  if (max_norm == 0.0) return keep;
  const double threshold = tol * max_norm;

  std::vector<Eigen::VectorXd> basis;
  for (Eigen::Index j = 0; j < p; ++j) {
    Eigen::VectorXd v = x.col(j);
    // two Gram-Schmidt passes
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) v -= q.dot(v) * q;
    }
    const double norm = v.norm();
    if (norm > threshold) {
      keep[static_cast<std::size_t>(j)] = true;
      basis.push_back(v / norm);
    }
  }
  return keep;
}

Eigen::MatrixXd cluster_sandwich(const Eigen::MatrixXd& x, const Eigen::VectorXd& resid,
                                 std::span<const int> cluster, int n_clusters) {
  const auto k = x.cols();
  Eigen::MatrixXd scores = Eigen::MatrixXd::Zero(n_clusters, k);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    scores.row(cluster[static_cast<std::size_t>(i)]) += resid(i) * x.row(i);
  }
  const Eigen::MatrixXd meat = scores.transpose() * scores;
  const Eigen::MatrixXd xtx = x.transpose() * x;
  const Eigen::MatrixXd bread = xtx.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return bread * meat * bread;
}

double cr1_factor(std::size_t n_clusters, std::size_t n_obs, std::size_t n_regressors) {
  if (n_clusters < 2 || n_obs <= n_regressors) return std::numeric_limits<double>::quiet_NaN();
  const auto g = static_cast<double>(n_clusters);
  const auto n = static_cast<double>(n_obs);
  const auto k = static_cast<double>(n_regressors);
  return g / (g - 1.0) * (n - 1.0) / (n - k);
}

std::vector<FeOlsFit> fit_fe_ols_multi(const Eigen::MatrixXd& y, const Eigen::MatrixXd& x,
                                       std::span<const std::string> families,
                                       const std::vector<std::string>& column_names) {
  const auto p = x.cols();
  const auto m = y.cols();
  if (y.rows() != x.rows()) throw ValidationError("outcome and design row counts differ");
  if (p < 1) throw ValidationError("design has no columns");
  if (static_cast<Eigen::Index>(column_names.size()) != p) {
    throw ValidationError("column name count differs from design width");
  }

  Eigen::MatrixXd joint(x.rows(), p + m);
  joint << x, y;
  const DemeanedDesign dm = within_demean(joint, families);
  const Eigen::MatrixXd xd = dm.values.leftCols(p);
  const Eigen::MatrixXd yd = dm.values.rightCols(m);

  const std::vector<bool> keep = retained_columns(xd);
  if (!keep[0]) throw EstimationError("treatment has no within-family variation");
  std::vector<Eigen::Index> kept;
  std::vector<std::string> dropped;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (keep[static_cast<std::size_t>(j)]) {
      kept.push_back(j);
    } else {
      dropped.push_back(column_names[static_cast<std::size_t>(j)]);
    }
  }
  const auto r = static_cast<Eigen::Index>(kept.size());
  Eigen::MatrixXd xr(xd.rows(), r);
  for (Eigen::Index c = 0; c < r; ++c) xr.col(c) = xd.col(kept[static_cast<std::size_t>(c)]);

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(xr);
  const Eigen::MatrixXd coef = qr.solve(yd);
  const Eigen::MatrixXd resid = yd - xr * coef;

  const std::size_t n_obs = dm.rows.size();
  const std::size_t n_fam = dm.families.size();
  const double factor = cr1_factor(n_fam, n_obs, static_cast<std::size_t>(r));

  std::vector<FeOlsFit> fits(static_cast<std::size_t>(m));
  for (Eigen::Index o = 0; o < m; ++o) {
    FeOlsFit& f = fits[static_cast<std::size_t>(o)];
    f.column_names = column_names;
    f.dropped_columns = dropped;
    f.n_obs = n_obs;
    f.n_families = n_fam;
    f.beta = Eigen::VectorXd::Zero(p);
    f.cluster_se = Eigen::VectorXd::Zero(p);
    for (Eigen::Index c = 0; c < r; ++c) f.beta(kept[static_cast<std::size_t>(c)]) = coef(c, o);
    f.residuals = resid.col(o);

    const Eigen::MatrixXd v =
        cluster_sandwich(xr, f.residuals, dm.cluster, static_cast<int>(n_fam)) * factor;
    for (Eigen::Index c = 0; c < r; ++c) {
      f.cluster_se(kept[static_cast<std::size_t>(c)]) = std::sqrt(std::max(0.0, v(c, c)));
    }
    if (std::isnan(factor)) f.cluster_se.setConstant(std::numeric_limits<double>::quiet_NaN());

    for (std::size_t g = 0; g < n_fam; ++g) {
      const auto gi = static_cast<Eigen::Index>(g);
      const double xb = dm.family_means.row(gi).head(p).dot(f.beta);
      f.family_effects.emplace(dm.families[g], dm.family_means(gi, p + o) - xb);
    }
  }
  return fits;
}

FeOlsFit fit_fe_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                    std::span<const std::string> families,
                    const std::vector<std::string>& column_names) {
  return std::move(fit_fe_ols_multi(y, x, families, column_names).front());
}

Controls parse_controls(const std::string& csv) {
  Controls c;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "oldest") {
      c.oldest = true;
    } else if (item == "sex") {
      c.sex = true;
    } else if (item == "linear_age") {
      c.linear_age = true;
    } else if (item == "flexible_age") {
      c.flexible_age = true;
    } else {
      throw ValidationError("unknown control '" + item + "'");
    }
  }
  return c;
}

std::string to_string(const Controls& c) {
  std::string out;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(c.oldest, "oldest");
  add(c.sex, "sex");
  add(c.linear_age, "linear_age");
  add(c.flexible_age, "flexible_age");
  return out;
}

RegressionSpec RegressionSpec::mean_score(std::string question, Controls c) {
  RegressionSpec s;
  s.outcome = OutcomeKind::mean_score;
  s.question_id = std::move(question);
  s.controls = c;
  return s;
}

RegressionSpec RegressionSpec::binarized(std::string question, std::set<int> codes, Controls c) {
  RegressionSpec s;
  s.outcome = OutcomeKind::binarized;
  s.threshold_set = std::move(codes);
  s.question_id = std::move(question);
  s.controls = c;
  return s;
}

RegressionSpec RegressionSpec::category_indicator(std::string question, int code, Controls c) {
  RegressionSpec s;
  s.outcome = OutcomeKind::category_indicator;
  s.category = code;
  s.question_id = std::move(question);
  s.controls = c;
  return s;
}

Design build_design(std::span<const RespondentRecord* const> records, const Controls& controls) {
  std::vector<int> ages;
  if (controls.flexible_age) {
    std::set<int> distinct;
    for (const auto* r : records) distinct.insert(r->age_at_interview);
    // sample-minimum age is the omitted reference
    ages.assign(distinct.begin(), distinct.end());
    if (!ages.empty()) ages.erase(ages.begin());
  }

  Design d;
  d.names.emplace_back("mig_age");
  if (controls.oldest) d.names.emplace_back("oldest");
  if (controls.sex) d.names.emplace_back("sex");
  if (controls.linear_age) d.names.emplace_back("age");
  for (int a : ages) d.names.push_back("age=" + std::to_string(a));

  const auto n = static_cast<Eigen::Index>(records.size());
  d.x = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(d.names.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = *records[static_cast<std::size_t>(i)];
    if (!r.treatment) throw ValidationError("record for person '" + r.person_id + "' lacks treatment");
    Eigen::Index c = 0;
    d.x(i, c++) = *r.treatment;
    if (controls.oldest) d.x(i, c++) = r.oldest;
    if (controls.sex) d.x(i, c++) = r.sex;
    if (controls.linear_age) d.x(i, c++) = r.age_at_interview;
    for (int a : ages) d.x(i, c++) = r.age_at_interview == a ? 1.0 : 0.0;
    d.families.push_back(r.family_id);
    d.persons.push_back(r.person_id);
  }
  return d;
}

namespace {

std::vector<const RespondentRecord*> treated_records(const Panel& panel, const std::string& q) {
  if (!panel.has_question(q)) throw ValidationError("unknown question id '" + q + "'");
  auto recs = panel.select(q, Group::treated);
  if (recs.empty()) throw ValidationError("no treated records for question '" + q + "'");
  return recs;
}

}  // namespace

FeOlsFit fit_regression(const Panel& panel, const RegressionSpec& spec) {
  const auto& scale = panel.scale();
  if (spec.outcome == OutcomeKind::binarized) {
    if (spec.threshold_set.empty() || spec.threshold_set.size() >= scale.size()) {
      throw ValidationError("binarized threshold set must be a nonempty proper subset");
    }
    for (int c : spec.threshold_set) {
      if (!scale.contains(c)) throw ValidationError("binarized code outside the scale");
    }
  }
  if (spec.outcome == OutcomeKind::category_indicator && !scale.contains(spec.category)) {
    throw ValidationError("category code outside the scale");
  }

  const auto recs = treated_records(panel, spec.question_id);
  const Design d = build_design(recs, spec.controls);
  Eigen::VectorXd y(static_cast<Eigen::Index>(recs.size()));
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const int code = recs[i]->response;
    double v = 0.0;
    switch (spec.outcome) {
      case OutcomeKind::mean_score: v = code; break;
      case OutcomeKind::binarized: v = spec.threshold_set.count(code) ? 1.0 : 0.0; break;
      case OutcomeKind::category_indicator: v = code == spec.category ? 1.0 : 0.0; break;
    }
    y(static_cast<Eigen::Index>(i)) = v;
  }
  return fit_fe_ols(y, d.x, d.families, d.names);
}

FeOlsFit fit_mean_score(const Panel& panel, const std::string& question, Controls controls) {
  return fit_regression(panel, RegressionSpec::mean_score(question, controls));
}

CategorySystemFit fit_category_system(const Panel& panel, const std::string& question,
                                      Controls controls) {
  const auto recs = treated_records(panel, question);
  const std::size_t k = panel.scale().size();
  const Design d = build_design(recs, controls);

  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(recs.size()),
                                            static_cast<Eigen::Index>(k));
  std::vector<std::size_t> chosen(k, 0);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto a = static_cast<std::size_t>(recs[i]->response - 1);
    y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a)) = 1.0;
    chosen[a]++;
  }

  const auto fits = fit_fe_ols_multi(y, d.x, d.families, d.names);

  CategorySystemFit out;
  out.question_id = question;
  out.n_obs = fits.front().n_obs;
  out.n_families = fits.front().n_families;
  out.dropped_columns = fits.front().dropped_columns;
  out.control_names.assign(d.names.begin() + 1, d.names.end());
  out.betas.resize(k);
  out.cluster_se.resize(k);
  out.control_betas.resize(k);

  // families present in the fit
  for (const auto& [fam, _] : fits.front().family_effects) out.family_effects[fam].assign(k, 0.0);
  for (const auto& fam : d.families) {
    if (!out.family_effects.count(fam) &&
        std::find(out.dropped_families.begin(), out.dropped_families.end(), fam) ==
            out.dropped_families.end()) {
      out.dropped_families.push_back(fam);
    }
  }

  for (std::size_t a = 0; a < k; ++a) {
    const FeOlsFit& f = fits[a];
    const bool degenerate = chosen[a] == 0;
    if (degenerate) out.degenerate_categories.push_back(static_cast<int>(a + 1));
    out.betas[a] = degenerate ? 0.0 : f.beta(0);
    out.cluster_se[a] = degenerate ? 0.0 : f.cluster_se(0);
    out.control_betas[a].assign(d.names.size() - 1, 0.0);
    if (!degenerate) {
      for (std::size_t j = 1; j < d.names.size(); ++j) {
        out.control_betas[a][j - 1] = f.beta(static_cast<Eigen::Index>(j));
      }
    }
    for (const auto& [fam, g] : f.family_effects) out.family_effects[fam][a] = degenerate ? 0.0 : g;
  }

  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = *recs[i];
    if (!out.family_effects.count(r.family_id)) continue;
    out.person_family[r.person_id] = r.family_id;
    if (controls.any()) {
      std::vector<double> row(d.names.size() - 1);
      for (std::size_t j = 1; j < d.names.size(); ++j) {
        row[j - 1] = d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
      out.person_controls[r.person_id] = std::move(row);
    }
  }
  return out;
}

}  // namespace distconv
