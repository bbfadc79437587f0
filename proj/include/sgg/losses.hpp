#pragma once
// Edge-loss formulations over a batch of scene graphs.
//
// With per-item cross-entropies averaged into L_FG and L_BG and batch
// density d = m_fg / (m_fg + m_bg), the variants are:
//
//   baseline      L = L_node + d * L_FG + (1 - d) * L_BG
//                 (identical to the flat mean over all edges)
//   normalized    L = L_node + gamma * (L_FG + (m_bg / m_fg) * L_BG)
//                 (gamma = 1 is the hyperparameter-free default)
//   tuned_ab      L = L_node + alpha * L_FG + beta * L_BG
//   tuned_lambda  L = L_node + lambda * (d * L_FG + (1 - d) * L_BG)
//
// Every variant is also expressible as a weighted sum of per-edge
// cross-entropies; per_edge_weights/group_edge_weights give those weights
// so a trainer can backpropagate any variant.

#include <cstddef>
#include <map>
#include <string>

#include "sgg/core.hpp"

namespace sgg {

enum class LossVariant { baseline, normalized, tuned_ab, tuned_lambda };

std::string to_string(LossVariant v);
LossVariant loss_variant_from_string(const std::string& s);

struct LossConfig {
  LossVariant variant = LossVariant::baseline;
  double gamma = 1.0;   // normalized
  double alpha = 1.0;   // tuned_ab
  double beta = 1.0;    // tuned_ab
  double lambda = 1.0;  // tuned_lambda
};

// Throws ValidationError unless every scalar is > 0.
void validate_loss_config(const LossConfig& cfg);

struct EdgeLossTerms {
  double l_fg = 0.0;  // mean FG cross-entropy
  double l_bg = 0.0;  // mean BG cross-entropy
  std::size_t m_fg = 0;
  std::size_t m_bg = 0;

  double density() const {
    const std::size_t m = m_fg + m_bg;
    return m > 0 ? static_cast<double>(m_fg) / static_cast<double>(m) : 0.0;
  }
};

// Identifies one ordered pair inside a batch.
struct EdgeKey {
  int graph = 0;  // index into Batch::graphs
  int subject = 0;
  int object = 0;

  auto operator<=>(const EdgeKey&) const = default;
};

// Per-edge cross-entropies for a batch: one entry per FG edge and one per
// BG pair. edge_terms validates completeness, since a silently missing BG
// entry would change d.
struct BatchEdgeLosses {
  std::map<EdgeKey, double> fg;
  std::map<EdgeKey, double> bg;
};

// Means and counts per group. Throws ValidationError on missing/extra/
// negative entries and DegenerateBatchError when the batch has no FG edges.
EdgeLossTerms edge_terms(const Batch& batch, const BatchEdgeLosses& losses);

struct LossValue {
  double total = 0.0;
  double l_node = 0.0;
  EdgeLossTerms edge;
};

LossValue baseline_loss(double l_node, const EdgeLossTerms& terms);
LossValue normalized_loss(double l_node, const EdgeLossTerms& terms, double gamma);
// variant must be tuned_ab or tuned_lambda.
LossValue tuned_loss(double l_node, const EdgeLossTerms& terms, const LossConfig& cfg);
// Dispatch on cfg.variant.
LossValue compute_loss(double l_node, const EdgeLossTerms& terms, const LossConfig& cfg);

// The per-edge weights that make sum(w_e * ce_e) + l_node reproduce the
// configured variant for any per-edge losses. Weights are uniform within
// each group:
//   baseline      fg = bg = 1 / (m_fg + m_bg)
//   normalized    fg = bg = gamma / m_fg
//   tuned_ab      fg = alpha / m_fg, bg = beta / m_bg
//   tuned_lambda  fg = bg = lambda / (m_fg + m_bg)
struct GroupWeights {
  double fg = 0.0;
  double bg = 0.0;
};

GroupWeights group_edge_weights(std::size_t m_fg, std::size_t m_bg,
                                const LossConfig& cfg);

struct PerEdgeWeights {
  std::map<EdgeKey, double> fg;
  std::map<EdgeKey, double> bg;
};

PerEdgeWeights per_edge_weights(const Batch& batch, const LossConfig& cfg);

}  // namespace sgg
