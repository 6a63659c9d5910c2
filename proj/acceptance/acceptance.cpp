/*
 * Copyright 2026 The ILE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances, case counts and wall-time limits are fixed
// here; a criterion passes only if its check holds and it ran within the
// limit.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "ile/parallel.hpp"
#include "ile/suites.hpp"

namespace {

using ile::SuiteResult;

struct Criterion {
  int id;
  std::string title;
  double limit_seconds;
  std::function<SuiteResult()> run;
  std::function<bool(const SuiteResult&)> check;
  std::function<std::string(const SuiteResult&)> summary;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double detail(const SuiteResult& r, const char* key) { return r.details.at(key).get<double>(); }

}  // namespace

int main() {
  constexpr double kComparisonSlack = 1e-9;
  constexpr double kFisherTol = 1e-12;
  constexpr double kFilterSlack = 1e-6;
  constexpr double kRateSlope = -0.20;
  constexpr double kDeffSlack = 1e-9;
  constexpr double kNystromTol = 1e-8;
  constexpr double kRfTol = 0.05;
  constexpr double kRfShare = 0.95;
  constexpr double kDecodeTol = 1e-2;
  constexpr double kEmbeddingTol = 1e-12;
  constexpr double kFourierTol = 1e-2;

  const std::vector<Criterion> criteria{
      {1, "comparison inequality", 30.0,
       [] { return ile::comparison_suite(1000, 101, kComparisonSlack, 5, 10); },
       [](const SuiteResult& r) { return r.cases == 1000 && r.failures == 0; },
       [](const SuiteResult& r) {
         return fmt("%.0f/1000 violations, max(lhs - rhs) = %.3g", static_cast<double>(r.failures), r.worst);
       }},
      {2, "Fisher consistency", 10.0,
       [] { return ile::fisher_suite(200, 102, kFisherTol); },
       [](const SuiteResult& r) { return r.cases == 200 && r.failures == 0 && r.worst <= kFisherTol; },
       [](const SuiteResult& r) { return fmt("max |E(d o g*) - E(f*)| = %.3g over 200 problems", r.worst); }},
      {3, "loss-trick equivalence", 60.0,
       [] { return ile::loss_trick_suite(103, 10, 50, 25); },
       [](const SuiteResult& r) { return r.cases > 0 && r.failures == 0 && detail(r, "fits") == 9 * 3 * 7; },
       [](const SuiteResult& r) {
         return fmt("%.0f mismatches in %.0f predictions (%.0f fits)", static_cast<double>(r.failures),
                    static_cast<double>(r.cases), detail(r, "fits"));
       }},
      {4, "spectral filter constants", 10.0,
       [] { return ile::filter_suite(1000, kFilterSlack, 0.5); },
       [](const SuiteResult& r) {
         for (const char* f : {"ridge", "pcr", "l2boost"}) {
           const auto& d = r.details.at(f);
           if (!(d.at("q1").get<double>() <= d.at("stated_q1").get<double>() + kFilterSlack)) return false;
           if (!(d.at("q2").get<double>() <= d.at("stated_q2").get<double>() + kFilterSlack)) return false;
         }
         return r.cases == 3;
       },
       [](const SuiteResult& r) {
         const auto& d = r.details;
         return fmt("q1/q2 ridge %.6f/%.6f, pcr %.6f/", d["ridge"]["q1"].get<double>(), d["ridge"]["q2"].get<double>(),
                    d["pcr"]["q1"].get<double>()) +
                fmt("%.6f, l2boost %.6f/%.6f", d["pcr"]["q2"].get<double>(), d["l2boost"]["q1"].get<double>(),
                    d["l2boost"]["q2"].get<double>());
       }},
      {5, "learning-rate slope", 300.0,
       [] { return ile::rate_suite(ile::default_rate_config(), kRateSlope); },
       [](const SuiteResult& r) { return std::isfinite(r.worst) && r.worst <= kRateSlope && r.cases == 6 * 20; },
       [](const SuiteResult& r) {
         const auto& ci = r.details.at("ci95");
         return fmt("slope %.3f (95%% CI %.3f .. %.3f), threshold -0.20", r.worst,
                    ci[0].is_null() ? NAN : ci[0].get<double>(), ci[1].is_null() ? NAN : ci[1].get<double>());
       }},
      {6, "effective-dimension bound", 30.0,
       [] { return ile::effective_dimension_suite(1000, 100, 106, kDeffSlack); },
       [](const SuiteResult& r) {
         return r.cases == 1000 && r.failures == 0 && detail(r, "monotonicity_breaks") == 0 && r.worst <= kDeffSlack;
       },
       [](const SuiteResult& r) {
         return fmt("max(d_eff - kappa^2/lambda) = %.3g, %.0f monotonicity breaks", r.worst,
                    detail(r, "monotonicity_breaks"));
       }},
      {7, "Nystrom exactness at M = n", 30.0,
       [] { return ile::nystrom_suite(100, 107, kNystromTol); },
       [](const SuiteResult& r) { return r.cases == 100 && r.failures == 0 && r.worst <= kNystromTol; },
       [](const SuiteResult& r) { return fmt("max relative alpha error %.3g over 100 instances", r.worst); }},
      {8, "random-feature approximation", 60.0,
       [] { return ile::random_feature_suite(100, 10000, 100, kRfTol, kRfShare, 108); },
       [](const SuiteResult& r) { return r.cases == 100 && detail(r, "passing_share") >= kRfShare; },
       [](const SuiteResult& r) {
         return fmt("%.0f%% of seeds below 0.05, worst sup %.4f", 100.0 * detail(r, "passing_share"), r.worst);
       }},
      {9, "continuous decoding oracle", 60.0,
       [] { return ile::sphere_decoding_suite(100, 10000, kDecodeTol, 109); },
       [](const SuiteResult& r) { return r.cases == 200 && r.failures == 0 && r.worst <= kDecodeTol; },
       [](const SuiteResult& r) {
         return fmt("worst gap sphere %.3g, sgd %.3g", detail(r, "worst_sphere"), detail(r, "worst_sgd"));
       }},
      {10, "finite-embedding reconstruction", 5.0,
       [] { return ile::embedding_suite(kEmbeddingTol, 110); },
       [](const SuiteResult& r) {
         if (r.failures != 0 || r.cases == 0) return false;
         for (const auto& [k, v] : r.details.items()) {
           if (!(v.at("reconstruction_error").get<double>() <= kEmbeddingTol)) return false;
           if (!(v.at("max_phi_norm").get<double>() <= 1.0)) return false;
           if (!(v.at("max_psi_norm").get<double>() <= v.at("closs_bound").get<double>())) return false;
         }
         return true;
       },
       [](const SuiteResult& r) {
         return fmt("%.0f losses, max reconstruction error %.3g", static_cast<double>(r.cases), r.worst);
       }},
      {11, "truncated Fourier embedding", 10.0,
       [] { return ile::fourier_suite(kFourierTol); },
       [](const SuiteResult& r) {
         double prev = INFINITY;
         for (int q : {1, 2, 4, 8, 16, 32, 64, 128, 200}) {
           const double e = r.details.at("errors").at(std::to_string(q)).get<double>();
           if (!(e < prev)) return false;
           prev = e;
         }
         return prev < kFourierTol;
       },
       [](const SuiteResult& r) { return fmt("error at Q = 200: %.3g, strictly decreasing over 9 values of Q", r.worst); }},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    SuiteResult r;
    bool ok = false;
    std::string text;
    try {
      r = c.run();
      ok = c.check(r) && r.seconds < c.limit_seconds;
      text = c.summary(r);
    } catch (const std::exception& e) {
      text = std::string("error: ") + e.what();
    }
    failed += !ok;
    std::printf("%s %2d %-32s %s [%.2fs, limit %.0fs]\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(), text.c_str(),
                r.seconds, c.limit_seconds);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
