#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "distconv/ordinal.hpp"

namespace testutil {

inline std::vector<double> random_simplex(std::mt19937_64& g, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(k);
  double s = 0.0;
  for (auto& v : p) s += (v = e(g));
  for (auto& v : p) v /= s;
  return p;
}

/// Zero-sum vector with entries of order `scale`.
inline std::vector<double> random_zero_sum(std::mt19937_64& g, std::size_t k, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> b(k);
  double s = 0.0;
  for (auto& v : b) s += (v = u(g));
  for (auto& v : b) v -= s / static_cast<double>(k);
  return b;
}

inline distconv::RespondentRecord treated(std::string person, std::string family, int response,
                                          double mig_age, std::string question = "Q1") {
  distconv::RespondentRecord r;
  r.person_id = std::move(person);
  r.family_id = std::move(family);
  r.group = distconv::Group::treated;
  r.question_id = std::move(question);
  r.response = response;
  r.treatment = mig_age;
  r.age_at_interview = 30;
  r.wave = "a";
  return r;
}

inline distconv::RespondentRecord reference(std::string person, std::string family, int response,
                                            std::string question = "Q1") {
  distconv::RespondentRecord r;
  r.person_id = std::move(person);
  r.family_id = std::move(family);
  r.group = distconv::Group::reference;
  r.question_id = std::move(question);
  r.response = response;
  r.age_at_interview = 30;
  r.wave = "a";
  return r;
}

/// Small treated panel: `families` families of 2..5 siblings with real
/// arrival ages, random sex / oldest / age and responses on 1..k.
inline distconv::Panel random_panel(std::mt19937_64& g, int families, std::size_t k,
                                    const std::string& question = "Q1") {
  std::uniform_int_distribution<int> size(2, 5), resp(1, static_cast<int>(k)), bit(0, 1), age(20, 40);
  std::uniform_real_distribution<double> arrival(0.0, 16.0);
  std::vector<distconv::RespondentRecord> recs;
  for (int f = 0; f < families; ++f) {
    const int n = size(g);
    for (int j = 0; j < n; ++j) {
      auto r = treated("F" + std::to_string(f) + "_" + std::to_string(j), "F" + std::to_string(f), resp(g),
                       arrival(g), question);
      r.sex = bit(g);
      r.oldest = j == 0;
      r.age_at_interview = age(g);
      recs.push_back(r);
    }
  }
  return distconv::Panel(distconv::OrdinalScale::with_size(k), std::move(recs));
}

/// OLS on [x | family dummies] by complete orthogonal decomposition;
/// returns the x coefficients followed by one intercept per family in
/// first-appearance order.
inline Eigen::VectorXd dummy_ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& x,
                                 const std::vector<std::string>& families) {
  std::vector<std::string> ids;
  for (const auto& f : families) {
    if (std::find(ids.begin(), ids.end(), f) == ids.end()) ids.push_back(f);
  }
  Eigen::MatrixXd full = Eigen::MatrixXd::Zero(x.rows(), x.cols() + static_cast<Eigen::Index>(ids.size()));
  full.leftCols(x.cols()) = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto pos = std::find(ids.begin(), ids.end(), families[static_cast<std::size_t>(i)]) - ids.begin();
    full(i, x.cols() + pos) = 1.0;
  }
  return full.completeOrthogonalDecomposition().solve(y);
}

}  // namespace testutil
