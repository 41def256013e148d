#pragma once

#include <torch/torch.h>

#include "terragan/loss_config.hpp"

namespace terragan {

enum class Label { fake = 0, real = 1 };

// All objectives reduce with a mean over batch (and pixels for the
// reconstruction term) and return 0-dim tensors that carry autograd history.
// Non-finite inputs throw InvalidInput.

torch::Tensor adversarial_loss(const torch::Tensor& scores, Label target, AdversarialVariant variant);
torch::Tensor reconstruction_loss(const torch::Tensor& y, const torch::Tensor& y_hat, Distance distance);

torch::Tensor heightmap_generator_objective(const torch::Tensor& fake_scores, const LossConfig& config);
torch::Tensor heightmap_discriminator_objective(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                                                const LossConfig& config);

/// adversarial(fake, real) + lambda * d(y, y_hat)
torch::Tensor texture_generator_objective(const torch::Tensor& fake_scores, const torch::Tensor& y,
                                          const torch::Tensor& y_hat, const LossConfig& config);
torch::Tensor texture_discriminator_objective(const torch::Tensor& real_pair_scores,
                                              const torch::Tensor& fake_pair_scores, const LossConfig& config);

}  // namespace terragan
