#pragma once

#include <string>

namespace terragan {

/// Per-sample adversarial term: squared error (LSGAN) or sigmoid cross-entropy on logits.
enum class AdversarialVariant { least_squares, cross_entropy };
/// Pixel-wise reconstruction distance for the texture generator.
enum class Distance { l1, l2 };

struct LossConfig {
  AdversarialVariant variant = AdversarialVariant::least_squares;
  double lambda = 100.0;
  Distance distance = Distance::l1;

  void validate() const;
};

std::string to_string(AdversarialVariant variant);
std::string to_string(Distance distance);
AdversarialVariant variant_from_string(const std::string& text);
Distance distance_from_string(const std::string& text);

}  // namespace terragan
