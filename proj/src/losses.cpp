#include "terragan/losses.hpp"

#include <cmath>

#include "terragan/image.hpp"

namespace terragan {
namespace {

void require_finite(const torch::Tensor& t, const char* what) {
  if (t.numel() == 0) throw InvalidInput(std::string(what) + ": empty tensor");
  if (!torch::isfinite(t.detach()).all().item<bool>()) {
    throw InvalidInput(std::string(what) + ": non-finite values");
  }
}

}  // namespace

void LossConfig::validate() const {
  if (!std::isfinite(lambda) || lambda < 0.0) throw InvalidInput("lambda must be finite and >= 0");
}

std::string to_string(AdversarialVariant variant) {
  return variant == AdversarialVariant::least_squares ? "least_squares" : "cross_entropy";
}

std::string to_string(Distance distance) { return distance == Distance::l1 ? "L1" : "L2"; }

AdversarialVariant variant_from_string(const std::string& text) {
  if (text == "least_squares") return AdversarialVariant::least_squares;
  if (text == "cross_entropy") return AdversarialVariant::cross_entropy;
  throw InvalidInput("unknown loss variant '" + text + "'");
}

Distance distance_from_string(const std::string& text) {
  if (text == "L1" || text == "l1") return Distance::l1;
  if (text == "L2" || text == "l2") return Distance::l2;
  throw InvalidInput("unknown distance '" + text + "'");
}

torch::Tensor adversarial_loss(const torch::Tensor& scores, Label target, AdversarialVariant variant) {
  require_finite(scores, "adversarial_loss");
  const double t = target == Label::real ? 1.0 : 0.0;
  if (variant == AdversarialVariant::least_squares) return (scores - t).pow(2).mean();
  // -[t log sigmoid(s) + (1-t) log(1 - sigmoid(s))], written in the overflow-safe form
  // max(s,0) - t*s + log(1 + exp(-|s|)).
  return (scores.clamp_min(0.0) - t * scores + torch::log1p(torch::exp(-scores.abs()))).mean();
}

torch::Tensor reconstruction_loss(const torch::Tensor& y, const torch::Tensor& y_hat, Distance distance) {
  if (!y.sizes().equals(y_hat.sizes())) throw InvalidInput("reconstruction_loss: shape mismatch");
  require_finite(y, "reconstruction_loss");
  require_finite(y_hat, "reconstruction_loss");
  const auto diff = y - y_hat;
  return distance == Distance::l1 ? diff.abs().mean() : diff.pow(2).mean();
}

torch::Tensor heightmap_generator_objective(const torch::Tensor& fake_scores, const LossConfig& config) {
  return adversarial_loss(fake_scores, Label::real, config.variant);
}

torch::Tensor heightmap_discriminator_objective(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                                                const LossConfig& config) {
  return adversarial_loss(real_scores, Label::real, config.variant) +
         adversarial_loss(fake_scores, Label::fake, config.variant);
}

torch::Tensor texture_generator_objective(const torch::Tensor& fake_scores, const torch::Tensor& y,
                                          const torch::Tensor& y_hat, const LossConfig& config) {
  config.validate();
  return adversarial_loss(fake_scores, Label::real, config.variant) +
         config.lambda * reconstruction_loss(y, y_hat, config.distance);
}

torch::Tensor texture_discriminator_objective(const torch::Tensor& real_pair_scores,
                                              const torch::Tensor& fake_pair_scores, const LossConfig& config) {
  return adversarial_loss(real_pair_scores, Label::real, config.variant) +
         adversarial_loss(fake_pair_scores, Label::fake, config.variant);
}

}  // namespace terragan
