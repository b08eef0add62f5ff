#include "distconv/pipeline.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "distconv/distance.hpp"
#include "distconv/errors.hpp"
#include "distconv/fe_lpm.hpp"
#include "distconv/resampling.hpp"
#include "distconv/synthgen.hpp"

namespace distconv {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::vector<const RespondentRecord*> analysis_population(const Panel& panel,
                                                         const std::string& question) {
  const auto treated = panel.select(question, Group::treated);
  std::map<std::string, std::size_t> size;
  for (const auto* r : treated) size[r->family_id]++;
  std::vector<const RespondentRecord*> out;
  for (const auto* r : treated) {
    if (size[r->family_id] >= 2) out.push_back(r);
  }
  return out;
}

QuestionAnalysis analyze_question(const Panel& panel, const std::string& question,
                                  Controls controls) {
  if (!panel.has_question(question)) throw ValidationError("unknown question id '" + question + "'");
  const auto population = analysis_population(panel, question);
  if (population.empty()) {
    throw EstimationError("question '" + question + "' has no treated family with two or more members");
  }
  CategorySystemFit fit = fit_category_system(panel, question, controls);
  std::vector<std::string> persons;
  persons.reserve(population.size());
  for (const auto* r : population) persons.push_back(r->person_id);

  ResponseDistribution p_t = empirical_distribution(panel.scale(), population);
  ResponseDistribution p_r = empirical_distribution(panel, question, Group::reference);
  ResponseDistribution p_cf = counterfactual_distribution(fit, panel.scale(), persons);
  EstimandSet est = compute_estimands(p_r, p_t, p_cf, fit.betas);
  const std::size_t excluded = panel.select(question, Group::treated).size() - population.size();
  return QuestionAnalysis{question,       std::move(p_t), std::move(p_r), std::move(p_cf),
                          std::move(fit), std::move(est), excluded};
}

std::vector<double> analysis_vector(const QuestionAnalysis& qa) {
  const std::size_t k = qa.p_treated.size();
  const StatLayout layout{k};
  std::vector<double> v(layout.block(), 0.0);
  const auto& e = qa.estimands;
  v[StatLayout::tv_observed] = e.tv_observed;
  v[StatLayout::tv_counterfactual] = e.tv_counterfactual;
  v[StatLayout::delta_tv0] = e.delta_tv0;
  v[StatLayout::mtvd] = e.mtvd;
  v[StatLayout::kd_observed] = e.kd_observed;
  v[StatLayout::kd_counterfactual] = e.kd_counterfactual;
  v[StatLayout::delta_kd0] = e.delta_kd0;
  v[StatLayout::mkd_lo] = e.mkd.lo;
  v[StatLayout::mkd_hi] = e.mkd.hi;
  double sb = 0.0;
  for (double b : qa.fit.betas) sb += b;
  double sf = 0.0;
  for (const auto& [person, fam] : qa.fit.person_family) {
    for (double g : qa.fit.family_effects.at(fam)) sf += g;
  }
  v[StatLayout::sum_betas] = sb;
  v[StatLayout::mean_sum_fe] = sf / static_cast<double>(qa.fit.person_family.size());
  v[StatLayout::degenerate_categories] = static_cast<double>(qa.fit.degenerate_categories.size());
  for (std::size_t a = 0; a < k; ++a) {
    v[layout.beta(a)] = qa.fit.betas[a];
    v[layout.treated_share(a)] = qa.p_treated[a];
    v[layout.counterfactual_share(a)] = qa.p_counterfactual[a];
    v[layout.reference_share(a)] = qa.p_reference[a];
  }
  return v;
}

std::vector<double> analysis_statistic(const Panel& panel, const std::vector<std::string>& questions,
                                       Controls controls) {
  std::vector<double> out;
  for (const auto& q : questions) {
    const auto v = analysis_vector(analyze_question(panel, q, controls));
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

std::string format_cell(double point, double lo, double hi) {
  return format_short(point) + " [" + format_short(lo) + ", " + format_short(hi) + "]";
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string join_flags(const std::vector<std::string>& flags) {
  std::string out;
  for (const auto& f : flags) out += (out.empty() ? "" : ";") + f;
  return out;
}

class Report {
 public:
  Report(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
    meta_["tool"] = "distconv";
    meta_["version"] = kVersion;
    meta_["command"] = command_;
    meta_["seed"] = cfg.bootstrap.seed;
    meta_["reps"] = cfg.bootstrap.reps;
    meta_["ci_level"] = cfg.bootstrap.ci_level;
    meta_["config"] = cfg.to_json();
  }

  void add(ReportRecord r) { records_.push_back(std::move(r)); }
  void note(const std::string& key, const std::string& value) { meta_["notes"][key] = value; }
  std::ostringstream& tables() { return tables_; }

  /// Extra tidy TSV with the same provenance header.
  void add_table_file(const std::string& name, std::string header, std::string body) {
    extra_.push_back({name, std::move(header), std::move(body)});
  }

  std::vector<fs::path> write() const {
    fs::create_directories(cfg_.out_dir);
    std::vector<fs::path> written;
    const bool json = cfg_.format == "json";
    const fs::path rec_path = cfg_.out_dir / (command_ + ".records." + (json ? "json" : "tsv"));
    {
      std::ofstream out(rec_path, std::ios::binary);
      if (json) {
        ordered_json doc;
        doc["meta"] = meta_;
        ordered_json arr = ordered_json::array();
        for (const auto& r : records_) {
          arr.push_back({{"estimand", r.estimand},
                         {"question", r.question},
                         {"point", r.point},
                         {"ci_low", r.ci_low},
                         {"ci_high", r.ci_high},
                         {"flags", r.flags}});
        }
        doc["records"] = arr;
        out << doc.dump(2) << '\n';
      } else {
        write_header(out);
        out << "estimand\tquestion\tpoint\tci_low\tci_high\tflags\n";
        for (const auto& r : records_) {
          out << r.estimand << '\t' << r.question << '\t' << format_full(r.point) << '\t'
              << format_full(r.ci_low) << '\t' << format_full(r.ci_high) << '\t' << r.flags << '\n';
        }
      }
      written.push_back(rec_path);
    }
    {
      const fs::path p = cfg_.out_dir / (command_ + ".tables.txt");
      std::ofstream out(p, std::ios::binary);
      write_header(out);
      out << tables_.str();
      written.push_back(p);
    }
    for (const auto& e : extra_) {
      const fs::path p = cfg_.out_dir / (command_ + "." + e.name);
      std::ofstream out(p, std::ios::binary);
      write_header(out);
      out << e.header << '\n' << e.body;
      written.push_back(p);
    }
    return written;
  }

 private:
  void write_header(std::ostream& out) const {
    out << "# distconv " << kVersion << '\n';
    out << "# command: " << command_ << '\n';
    out << "# seed: " << cfg_.bootstrap.seed << '\n';
    if (meta_.contains("notes")) out << "# notes: " << meta_["notes"].dump() << '\n';
    out << "# config: " << meta_["config"].dump() << '\n';
  }

  struct Extra {
    std::string name;
    std::string header;
    std::string body;
  };

  std::string command_;
  const RunConfig& cfg_;
  ordered_json meta_;
  std::vector<ReportRecord> records_;
  std::ostringstream tables_;
  std::vector<Extra> extra_;
};

Panel load_panel(const RunConfig& cfg) {
  if (!cfg.data) throw ValidationError("no respondent data given (--data or config 'data')");
  return load_respondents(*cfg.data, cfg);
}

std::vector<std::string> resolve_questions(const Panel& panel, const RunConfig& cfg) {
  if (cfg.questions.empty()) return panel.questions();
  for (const auto& q : cfg.questions) {
    if (!panel.has_question(q)) throw ValidationError("unknown question id '" + q + "'");
  }
  return cfg.questions;
}

void require_ci(const RunConfig& cfg) {
  if (cfg.bootstrap.reps == 0) throw ValidationError("confidence intervals requested with B = 0 replicates");
}

/// Point estimates plus a bootstrap run over the full analysis statistic.
struct Inference {
  std::vector<std::string> questions;
  std::vector<QuestionAnalysis> point;
  StatLayout layout;
  BootstrapRun run;
  std::size_t degenerate_replicates = 0;

  std::pair<double, double> ci(std::size_t qi, std::size_t offset) const {
    if (run.replicates.empty()) return {kNaN, kNaN};
    return run.ci(qi * layout.block() + offset);
  }
};

Inference infer(const Panel& panel, const std::vector<std::string>& questions, const RunConfig& cfg) {
  Inference inf;
  inf.questions = questions;
  inf.layout = StatLayout{panel.scale().size()};
  for (const auto& q : questions) inf.point.push_back(analyze_question(panel, q, cfg.controls));
  const Controls controls = cfg.controls;
  const Statistic stat = [questions, controls](const Panel& p) {
    return analysis_statistic(p, questions, controls);
  };
  inf.run = family_bootstrap(panel, stat, cfg.bootstrap);
  if (inf.run.replicates.empty()) throw EstimationError("every bootstrap replicate failed");
  for (const auto& rep : inf.run.replicates) {
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
      if (rep[qi * inf.layout.block() + StatLayout::degenerate_categories] > 0.0) {
        ++inf.degenerate_replicates;
        break;
      }
    }
  }
  return inf;
}

std::vector<std::string> run_flags(const Inference& inf) {
  std::vector<std::string> f;
  if (!inf.run.failures.empty()) f.push_back("failed_replicates=" + std::to_string(inf.run.failures.size()));
  if (inf.degenerate_replicates > 0) {
    f.push_back("degenerate_replicates=" + std::to_string(inf.degenerate_replicates));
  }
  return f;
}

struct Row {
  const char* name;
  std::size_t offset;
};

void emit_section(Report& rep, const Inference& inf, const std::vector<Row>& rows,
                  const std::string& title, const std::string& sample) {
  auto& t = rep.tables();
  t << "\n== " << title << (sample == "all" ? "" : " (" + sample + ")") << " ==\n";
  t << "estimand";
  for (const auto& q : inf.questions) t << '\t' << q;
  t << '\n';
  for (const auto& row : rows) {
    t << row.name;
    for (std::size_t qi = 0; qi < inf.questions.size(); ++qi) {
      const QuestionAnalysis& qa = inf.point[qi];
      const auto& e = qa.estimands;
      const double point = analysis_vector(qa)[row.offset];
      auto [lo, hi] = inf.ci(qi, row.offset);
      std::vector<std::string> flags = run_flags(inf);
      if (sample != "all") flags.insert(flags.begin(), "sample=" + sample);
      if (qa.excluded_singletons > 0) flags.push_back("excluded_singletons=" + std::to_string(qa.excluded_singletons));
      const std::string name = row.name;
      double shown = point;
      if (name.find("counterfactual") != std::string::npos || name.find("delta") != std::string::npos) {
        if (!e.counterfactual_proper) flags.push_back("improper_counterfactual");
      }
      if (name == "mtvd" && e.mtvd_kink) flags.push_back("kink");
      if (name == "kd_observed") {
        std::string cuts;
        for (int c : kolmogorov_distance(qa.p_reference, qa.p_treated).argmax_cutoffs) {
          cuts += (cuts.empty() ? "" : ",") + std::to_string(c);
        }
        flags.push_back("cutoffs=" + cuts);
      }
      if (name == "mkd") {
        shown = e.mkd.point();
        hi = inf.ci(qi, StatLayout::mkd_hi).second;
        if (!e.mkd.is_scalar()) {
          flags.push_back("set_valued=[" + format_full(e.mkd.lo) + "," + format_full(e.mkd.hi) + "]");
        }
        if (e.mkd.undefined) flags.push_back("undefined_identical_distributions");
      }
      rep.add({name, inf.questions[qi], shown, lo, hi, join_flags(flags)});
      t << '\t' << format_cell(shown, lo, hi);
    }
    t << '\n';
  }
}

const std::vector<Row> kDistanceRows = {{"tv_observed", StatLayout::tv_observed},
                                        {"kd_observed", StatLayout::kd_observed}};
const std::vector<Row> kCounterfactualRows = {
    {"tv_observed", StatLayout::tv_observed},         {"tv_counterfactual", StatLayout::tv_counterfactual},
    {"delta_tv0", StatLayout::delta_tv0},             {"kd_observed", StatLayout::kd_observed},
    {"kd_counterfactual", StatLayout::kd_counterfactual}, {"delta_kd0", StatLayout::delta_kd0}};
const std::vector<Row> kMarginalRows = {{"mtvd", StatLayout::mtvd}, {"mkd", StatLayout::mkd_lo}};

void emit_shares(Report& rep, const std::vector<std::pair<std::string, const Inference*>>& samples,
                 const OrdinalScale& scale) {
  std::ostringstream body;
  for (const auto& [sample, inf] : samples) {
    for (std::size_t qi = 0; qi < inf->questions.size(); ++qi) {
      const auto& qa = inf->point[qi];
      for (std::size_t a = 0; a < scale.size(); ++a) {
        const std::pair<const char*, std::pair<double, std::size_t>> series[] = {
            {"treated", {qa.p_treated[a], inf->layout.treated_share(a)}},
            {"counterfactual", {qa.p_counterfactual[a], inf->layout.counterfactual_share(a)}},
            {"reference", {qa.p_reference[a], inf->layout.reference_share(a)}}};
        for (const auto& [group, val] : series) {
          const auto [lo, hi] = inf->ci(qi, val.second);
          body << sample << '\t' << qa.question << '\t' << (a + 1) << '\t' << scale.labels()[a] << '\t'
               << group << '\t' << format_full(val.first) << '\t' << format_full(lo) << '\t'
               << format_full(hi) << '\n';
        }
      }
    }
  }
  rep.add_table_file("shares.tsv", "sample\tquestion\tcode\tlabel\tseries\tshare\tci_low\tci_high", body.str());
}

void emit_consistency(Report& rep, const Inference& inf) {
  std::ostringstream body;
  for (std::size_t i = 0; i < inf.run.replicates.size(); ++i) {
    const auto& r = inf.run.replicates[i];
    for (std::size_t qi = 0; qi < inf.questions.size(); ++qi) {
      const std::size_t base = qi * inf.layout.block();
      body << inf.run.replicate_index[i] << '\t' << inf.questions[qi] << '\t'
           << format_full(r[base + StatLayout::sum_betas]) << '\t'
           << format_full(r[base + StatLayout::mean_sum_fe]) << '\n';
    }
  }
  rep.add_table_file("consistency.tsv", "replicate\tquestion\tsum_betas\tmean_sum_fe", body.str());

  auto& t = rep.tables();
  t << "\n== Adding-up checks across replicates ==\nquestion\tsum_betas_min\tsum_betas_max\tsum_fe_min\tsum_fe_max\n";
  for (std::size_t qi = 0; qi < inf.questions.size(); ++qi) {
    const std::size_t base = qi * inf.layout.block();
    const auto sb = inf.run.column(base + StatLayout::sum_betas);
    const auto sf = inf.run.column(base + StatLayout::mean_sum_fe);
    t << inf.questions[qi] << '\t' << format_short(*std::min_element(sb.begin(), sb.end())) << '\t'
      << format_short(*std::max_element(sb.begin(), sb.end())) << '\t'
      << format_short(*std::min_element(sf.begin(), sf.end())) << '\t'
      << format_short(*std::max_element(sf.begin(), sf.end())) << '\n';
  }
}

double normal_quantile(double level) {
  const boost::math::normal_distribution<double> n;
  return boost::math::quantile(n, 0.5 + 0.5 * level);
}

void emit_estimates(Report& rep, const Panel& panel, const std::vector<std::string>& questions,
                    const RunConfig& cfg) {
  const OrdinalScale& scale = panel.scale();
  const double z = normal_quantile(cfg.bootstrap.ci_level);
  std::set<int> bin = cfg.binarized_codes;
  if (bin.empty() && scale.size() == 5) bin = {1, 2, 3};
  std::vector<CollapsedCategory> collapsed = cfg.collapsed;
  if (collapsed.empty() && scale.size() == 5) {
    collapsed = {{"agree", {1, 2}}, {"neither", {3}}, {"disagree", {4, 5}}};
  }
  const std::string ctl = to_string(cfg.controls);

  struct Cell {
    std::string name;
    std::vector<std::string> text;
  };
  std::vector<Cell> rows;
  auto row = [&](const std::string& name) -> Cell& {
    for (auto& r : rows) {
      if (r.name == name) return r;
    }
    rows.push_back({name, {}});
    return rows.back();
  };
  auto add_fit = [&](const std::string& name, const std::string& q, const FeOlsFit& f) {
    std::vector<std::string> flags{"se=" + format_full(f.cluster_se(0)), "cluster=family_cr1",
                                   "n_obs=" + std::to_string(f.n_obs),
                                   "n_families=" + std::to_string(f.n_families)};
    if (!ctl.empty()) flags.push_back("controls=" + ctl);
    for (const auto& d : f.dropped_columns) flags.push_back("dropped=" + d);
    const double b = f.beta(0);
    const double se = f.cluster_se(0);
    rep.add({name, q, b, b - z * se, b + z * se, join_flags(flags)});
    row(name).text.push_back(format_short(b) + " (" + format_short(se) + ")");
  };
  auto add_mean = [&](const std::string& name, const std::string& q,
                      const std::vector<const RespondentRecord*>& recs, const std::set<int>& codes) {
    double m = 0.0;
    double m2 = 0.0;
    for (const auto* r : recs) {
      const double v = codes.empty() ? r->response : (codes.count(r->response) ? 1.0 : 0.0);
      m += v;
      m2 += v * v;
    }
    const double n = static_cast<double>(recs.size());
    m /= n;
    const double sd = n > 1 ? std::sqrt(std::max(0.0, (m2 - n * m * m) / (n - 1))) : kNaN;
    rep.add({name, q, m, kNaN, kNaN, "sd=" + format_full(sd) + ";n=" + std::to_string(recs.size())});
    row(name).text.push_back(format_short(m) + " [" + format_short(sd) + "]");
  };

  for (const auto& q : questions) {
    const auto treated = analysis_population(panel, q);
    const auto reference = panel.select(q, Group::reference);
    add_fit("mean_score_beta", q, fit_regression(panel, RegressionSpec::mean_score(q, cfg.controls)));
    if (!treated.empty()) add_mean("treated_mean_score", q, treated, {});
    if (!reference.empty()) add_mean("reference_mean_score", q, reference, {});
    if (!bin.empty()) {
      add_fit("binarized_beta", q, fit_regression(panel, RegressionSpec::binarized(q, bin, cfg.controls)));
      if (!treated.empty()) add_mean("treated_binarized_share", q, treated, bin);
      if (!reference.empty()) add_mean("reference_binarized_share", q, reference, bin);
    }
    for (const auto& cc : collapsed) {
      add_fit(cc.name + "_beta", q, fit_regression(panel, RegressionSpec::binarized(q, cc.codes, cfg.controls)));
    }
    const CategorySystemFit sys = fit_category_system(panel, q, cfg.controls);
    double sb = 0.0;
    for (std::size_t a = 0; a < sys.betas.size(); ++a) {
      sb += sys.betas[a];
      const std::string name = "lpm_beta_" + std::to_string(a + 1);
      const double b = sys.betas[a];
      const double se = sys.cluster_se[a];
      std::vector<std::string> flags{"se=" + format_full(se), "label=" + scale.labels()[a]};
      if (std::find(sys.degenerate_categories.begin(), sys.degenerate_categories.end(),
                    static_cast<int>(a + 1)) != sys.degenerate_categories.end()) {
        flags.push_back("degenerate_category");
      }
      rep.add({name, q, b, b - z * se, b + z * se, join_flags(flags)});
      row(name).text.push_back(format_short(b) + " (" + format_short(se) + ")");
    }
    double max_fe_dev = 0.0;
    for (const auto& [fam, g] : sys.family_effects) {
      double s = 0.0;
      for (double v : g) s += v;
      max_fe_dev = std::max(max_fe_dev, std::abs(s - 1.0));
    }
    rep.add({"sum_lpm_betas", q, sb, kNaN, kNaN, "max_family_fe_sum_deviation=" + format_full(max_fe_dev)});
    row("sum_lpm_betas").text.push_back(format_short(sb));
  }

  auto& t = rep.tables();
  t << "\n== Fixed-effects regressions: coefficient (clustered SE); group means [sd] ==\nrow";
  for (const auto& q : questions) t << '\t' << q;
  t << '\n';
  for (const auto& r : rows) {
    t << r.name;
    for (const auto& c : r.text) t << '\t' << c;
    t << '\n';
  }
}

SplitContext split_context(const RunConfig& cfg) {
  SplitContext ctx;
  ctx.rule = cfg.split;
  if (cfg.split == SplitRule::regions) {
    if (!cfg.regions) throw ValidationError("regions split needs a region map (--regions)");
    if (cfg.selected_regions.empty()) throw ValidationError("regions split needs a region list in the config");
    ctx.country_region = load_region_map(*cfg.regions);
    ctx.selected_regions = cfg.selected_regions;
  } else {
    if (!cfg.countries) throw ValidationError("median-distance split needs a country table (--countries)");
    ctx.countries = load_country_table(*cfg.countries, cfg.reference_country);
  }
  return ctx;
}

void run_hetero(Report& rep, const Panel& panel, const std::vector<std::string>& questions,
                const RunConfig& cfg, std::vector<std::pair<std::string, Inference>>& keep) {
  const SplitResult split = heterogeneity_split(panel, split_context(cfg));
  if (cfg.split == SplitRule::median_distance) rep.note("median_distance", format_full(split.median_distance));
  for (const auto& w : split.warnings) rep.note("warning_" + std::to_string(keep.size()), w);
  const std::pair<std::string, const Panel*> parts[] = {{split.first_label, &split.first},
                                                        {split.second_label, &split.second}};
  std::vector<Row> rows = kCounterfactualRows;
  rows.insert(rows.end(), kMarginalRows.begin(), kMarginalRows.end());
  for (const auto& [label, part] : parts) {
    if (part->select(questions.front(), Group::treated).empty() &&
        std::all_of(questions.begin(), questions.end(),
                    [&](const auto& q) { return part->select(q, Group::treated).empty(); })) {
      rep.tables() << "\n== Heterogeneity (" << label << ") ==\nno treated records\n";
      continue;
    }
    Inference inf = infer(*part, questions, cfg);
    emit_section(rep, inf, rows, "Heterogeneity", label);
    keep.emplace_back(label, std::move(inf));
  }
}

std::vector<fs::path> run_simulate(const RunConfig& cfg) {
  if (!cfg.synthetic) throw ValidationError("simulate needs a 'synthetic' section in the config");
  const SyntheticConfig& sc = *cfg.synthetic;
  const SyntheticPanel sim = generate_panel(sc);
  const TrueEstimands truth = true_estimands(sc);

  Report rep("simulate", cfg);
  fs::create_directories(cfg.out_dir);
  const fs::path panel_path = cfg.out_dir / "simulate.panel.csv";
  {
    std::ofstream out(panel_path, std::ios::binary);
    write_respondents(out, sim.panel);
  }
  const auto& questions = sc.questions;
  const bool with_ci = cfg.bootstrap.reps > 0;
  Inference inf;
  if (with_ci) {
    inf = infer(sim.panel, questions, cfg);
  } else {
    inf.questions = questions;
    inf.layout = StatLayout{sim.panel.scale().size()};
    for (const auto& q : questions) inf.point.push_back(analyze_question(sim.panel, q, cfg.controls));
  }
  std::vector<Row> rows = kCounterfactualRows;
  rows.insert(rows.end(), kMarginalRows.begin(), kMarginalRows.end());
  emit_section(rep, inf, rows, "Simulated panel estimands", "all");

  const auto& te = truth.estimands;
  std::ostringstream body;
  for (std::size_t qi = 0; qi < questions.size(); ++qi) {
    const auto v = analysis_vector(inf.point[qi]);
    auto line = [&](const std::string& name, double true_value, std::size_t offset) {
      const auto [lo, hi] = inf.ci(qi, offset);
      const bool covered = with_ci && lo <= true_value && true_value <= hi;
      body << name << '\t' << questions[qi] << '\t' << format_full(true_value) << '\t' << format_full(v[offset])
           << '\t' << format_full(lo) << '\t' << format_full(hi) << '\t' << (with_ci ? (covered ? "1" : "0") : "")
           << '\n';
    };
    for (std::size_t a = 0; a < sc.categories(); ++a) {
      line("beta_" + std::to_string(a + 1), sc.true_betas[a], inf.layout.beta(a));
    }
    line("tv_observed", te.tv_observed, StatLayout::tv_observed);
    line("tv_counterfactual", te.tv_counterfactual, StatLayout::tv_counterfactual);
    line("delta_tv0", te.delta_tv0, StatLayout::delta_tv0);
    line("mtvd", te.mtvd, StatLayout::mtvd);
    line("kd_observed", te.kd_observed, StatLayout::kd_observed);
    line("kd_counterfactual", te.kd_counterfactual, StatLayout::kd_counterfactual);
    line("delta_kd0", te.delta_kd0, StatLayout::delta_kd0);
  }
  rep.note("true_mtvd_finite_difference", format_full(truth.mtvd_finite_difference));
  rep.note("true_mean_treatment", format_full(truth.mean_treatment));
  rep.add_table_file("recovery.tsv", "estimand\tquestion\ttruth\testimate\tci_low\tci_high\tcovered",
                     body.str());
  auto files = rep.write();
  files.insert(files.begin(), panel_path);
  return files;
}

}  // namespace

std::vector<fs::path> run_command(const std::string& command, const RunConfig& cfg) {
  if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end()) {
    throw ValidationError("unknown command '" + command + "'");
  }
  cfg.validate();
  if (command == "simulate") return run_simulate(cfg);

  const Panel panel = load_panel(cfg);
  const auto questions = resolve_questions(panel, cfg);
  Report rep(command, cfg);

  if (command == "estimate") {
    emit_estimates(rep, panel, questions, cfg);
    return rep.write();
  }
  require_ci(cfg);

  if (command == "distances") {
    // observed distances only; no model fit needed
    const std::size_t k = panel.scale().size();
    const Statistic stat = [questions, k](const Panel& p) {
      std::vector<double> out;
      for (const auto& q : questions) {
        const auto pop = analysis_population(p, q);
        const auto pt = empirical_distribution(p.scale(), pop);
        const auto pr = empirical_distribution(p, q, Group::reference);
        out.push_back(tv_distance(pr, pt));
        out.push_back(kolmogorov_distance(pr, pt).value);
      }
      (void)k;
      return out;
    };
    const BootstrapRun run = family_bootstrap(panel, stat, cfg.bootstrap);
    if (run.replicates.empty()) throw EstimationError("every bootstrap replicate failed");
    const auto point = stat(panel);
    auto& t = rep.tables();
    t << "\n== Observed distances ==\nestimand";
    for (const auto& q : questions) t << '\t' << q;
    t << '\n';
    const char* names[] = {"tv_observed", "kd_observed"};
    for (std::size_t s = 0; s < 2; ++s) {
      t << names[s];
      for (std::size_t qi = 0; qi < questions.size(); ++qi) {
        const auto [lo, hi] = run.ci(2 * qi + s);
        std::vector<std::string> flags;
        if (!run.failures.empty()) flags.push_back("failed_replicates=" + std::to_string(run.failures.size()));
        rep.add({names[s], questions[qi], point[2 * qi + s], lo, hi, join_flags(flags)});
        t << '\t' << format_cell(point[2 * qi + s], lo, hi);
      }
      t << '\n';
    }
    return rep.write();
  }

  if (command == "hetero") {
    std::vector<std::pair<std::string, Inference>> parts;
    run_hetero(rep, panel, questions, cfg, parts);
    std::vector<std::pair<std::string, const Inference*>> samples;
    for (const auto& [label, inf] : parts) samples.emplace_back(label, &inf);
    emit_shares(rep, samples, panel.scale());
    return rep.write();
  }

  const Inference inf = infer(panel, questions, cfg);
  if (command == "counterfactual") {
    emit_section(rep, inf, kCounterfactualRows, "Global convergence (treatment set to 0)", "all");
    emit_shares(rep, {{"all", &inf}}, panel.scale());
  } else if (command == "marginal") {
    emit_section(rep, inf, kMarginalRows, "Marginal divergence", "all");
  } else {  // report
    emit_estimates(rep, panel, questions, cfg);
    emit_section(rep, inf, kDistanceRows, "Observed distances", "all");
    emit_section(rep, inf, {{"tv_counterfactual", StatLayout::tv_counterfactual},
                            {"delta_tv0", StatLayout::delta_tv0},
                            {"kd_counterfactual", StatLayout::kd_counterfactual},
                            {"delta_kd0", StatLayout::delta_kd0}},
                 "Global convergence (treatment set to 0)", "all");
    emit_section(rep, inf, kMarginalRows, "Marginal divergence", "all");
    emit_consistency(rep, inf);
    std::vector<std::pair<std::string, Inference>> parts;
    const bool split_inputs = cfg.split == SplitRule::regions ? cfg.regions.has_value() : cfg.countries.has_value();
    if (split_inputs) run_hetero(rep, panel, questions, cfg, parts);
    std::vector<std::pair<std::string, const Inference*>> samples{{"all", &inf}};
    for (const auto& [label, pinf] : parts) samples.emplace_back(label, &pinf);
    emit_shares(rep, samples, panel.scale());
  }
  return rep.write();
}

}  // namespace distconv
