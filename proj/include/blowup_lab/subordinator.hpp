#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "blowup_lab/bernstein.hpp"
#include "blowup_lab/rng.hpp"

namespace blowup_lab {

enum class SamplingStrategy { stable_exact, gamma_exact, composed, triplet_approx };

std::string_view to_string(SamplingStrategy s);

class JumpLaw;

// Draws S_t for a subordinator with Laplace exponent phi. Draw i of a
// batch uses the random stream (seed, stream_base + i), so results do not
// depend on how the batch is split across threads.
class SubordinatorSampler {
 public:
  // Picks the natural strategy for the spec: exact for stable and gamma,
  // composition for composed specs (geometric_stable is gamma over stable),
  // compound Poisson for relativistic and custom triplets. truncation <= 0
  // selects epsilon per time from a quarter-decade ladder.
  explicit SubordinatorSampler(BernsteinSpec spec, std::uint64_t seed = 0,
                               double truncation = 0.0);
  SubordinatorSampler(BernsteinSpec spec, SamplingStrategy strategy, std::uint64_t seed,
                      double truncation = 0.0);

  const BernsteinSpec& spec() const noexcept { return spec_; }
  SamplingStrategy strategy() const noexcept { return strategy_; }
  std::uint64_t seed() const noexcept { return seed_; }
  double truncation() const noexcept { return truncation_; }

  // Truncation level used for a triplet_approx draw at time t. Throws
  // RefinementError when a configured epsilon leaves too much small-jump
  // variance at this t.
  double truncation_for(double t) const;

  // One draw of S_t from an arbitrary generator.
  double draw(double t, CounterRng& rng) const;

  std::vector<double> sample(double t, std::size_t n, std::uint64_t stream_base = 0) const;

  // S at increasing times, built from independent increments on one stream.
  std::vector<double> sample_path(std::span<const double> times, std::uint64_t stream) const;

 private:
  std::shared_ptr<const JumpLaw> jump_law(double eps) const;
  double draw_triplet(double t, CounterRng& rng) const;

  BernsteinSpec spec_;
  SamplingStrategy strategy_;
  std::uint64_t seed_;
  double truncation_;
  std::shared_ptr<const SubordinatorSampler> outer_;
  std::shared_ptr<const SubordinatorSampler> inner_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

struct LaplaceCheck {
  double empirical = 0.0;
  double exact = 0.0;
  double stderr_ = 0.0;
  double zscore = 0.0;
};

// Compares mean(e^{-r S}) over n draws of S_t with e^{-t phi(r)}.
LaplaceCheck laplace_check(const SubordinatorSampler& sampler, double r, double t,
                           std::size_t n);
// Same comparison on draws already taken at time t.
LaplaceCheck laplace_check(const BernsteinSpec& spec, std::span<const double> draws, double r,
                           double t);

// E S_t^{-beta} = (1/Gamma(beta)) int_0^inf e^{-t phi(r)} r^{beta-1} dr.
double neg_moment(const BernsteinSpec& spec, double beta, double t);

// Closed-form floors for the two window probabilities below.
double window_bound();          // (e^{3/2} - 2e + 1) / (e (e - 1))
double subord_bound(double c);  // (e^{1-c} - 1) / (e - 1), 0 < c < 1

struct WindowReport {
  double t = 0.0;
  double lower = 0.0;      // [phi^{-1}(2/t)]^{-1}
  double upper = 0.0;      // [phi^{-1}(1/(2t))]^{-1}
  double threshold = 0.0;  // [phi^{-1}(c/t)]^{-1}, c = 1/2
  double window = 0.0;     // P(lower <= S_t <= upper)
  double window_stderr = 0.0;
  double window_floor = 0.0;
  double below = 0.0;  // P(S_t <= threshold)
  double below_stderr = 0.0;
  double below_floor = 0.0;
  bool window_ok = false;  // window >= floor - 3 stderr
  bool below_ok = false;
};

WindowReport window_probability(const SubordinatorSampler& sampler, double t, std::size_t n);

}  // namespace blowup_lab
