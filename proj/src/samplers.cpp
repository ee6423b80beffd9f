#include "ppd/samplers.hpp"

namespace ppd {

double gibbs_normal_mean(std::span<const NormalMeanTerm> terms, flat_location_t, RngStream& rng) {
  double prec = 0.0;
  double num = 0.0;
  for (const NormalMeanTerm& t : terms) {
    double w = t.weight * t.precision * t.n;
    prec += w;
    num += w * t.mean;
  }
  if (!(prec > 0.0))
    throw std::invalid_argument("normal mean conditional is improper (zero total precision)");
  return rng.normal(num / prec, 1.0 / std::sqrt(prec));
}

double gibbs_normal_precision(double weighted_n, double weighted_rss, jeffreys_precision_t,
                              RngStream& rng) {
  if (!(weighted_n > 0.0))
    throw std::invalid_argument("precision conditional requires positive weighted n");
  if (weighted_rss <= 0.0 && weighted_n > 1.0)
    throw std::runtime_error("degenerate data (zero variance)");
  return rng.gamma(0.5 * weighted_n, 0.5 * weighted_rss);
}

}  // namespace ppd
