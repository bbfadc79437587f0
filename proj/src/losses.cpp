#include "sgg/losses.hpp"

namespace sgg {

std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::baseline: return "baseline";
    case LossVariant::normalized: return "normalized";
    case LossVariant::tuned_ab: return "tuned-ab";
    case LossVariant::tuned_lambda: return "tuned-lambda";
  }
  return "?";
}

LossVariant loss_variant_from_string(const std::string& s) {
  if (s == "baseline") return LossVariant::baseline;
  if (s == "normalized") return LossVariant::normalized;
  if (s == "tuned-ab" || s == "tuned_ab") return LossVariant::tuned_ab;
  if (s == "tuned-lambda" || s == "tuned_lambda") return LossVariant::tuned_lambda;
  throw ValidationError("unknown loss variant: " + s);
}

void validate_loss_config(const LossConfig& cfg) {
  if (cfg.gamma <= 0 || cfg.alpha <= 0 || cfg.beta <= 0 || cfg.lambda <= 0) {
    throw ValidationError("loss config scalars must be > 0");
  }
}

EdgeLossTerms edge_terms(const Batch& batch, const BatchEdgeLosses& losses) {
  if (batch.m_fg == 0) {
    throw DegenerateBatchError("edge_terms: batch has no FG edges");
  }
  if (losses.fg.size() != batch.m_fg || losses.bg.size() != batch.m_bg) {
    throw ValidationError("edge_terms: loss map sizes do not match the batch (fg " +
                          std::to_string(losses.fg.size()) + "/" + std::to_string(batch.m_fg) +
                          ", bg " + std::to_string(losses.bg.size()) + "/" +
                          std::to_string(batch.m_bg) + ")");
  }

  double sum_fg = 0.0;
  double sum_bg = 0.0;
  for (int gi = 0; gi < static_cast<int>(batch.graphs.size()); ++gi) {
    const SceneGraph& g = batch.graphs[gi];
    for (const FgEdge& e : g.fg_edges) {
      auto it = losses.fg.find({gi, e.subject, e.object});
      if (it == losses.fg.end()) {
        throw ValidationError("edge_terms: missing FG loss entry for graph " +
                              std::to_string(gi));
      }
      if (it->second < 0) throw ValidationError("edge_terms: negative FG loss");
      sum_fg += it->second;
    }
    for (const auto& [i, j] : enumerate_bg_pairs(g)) {
      auto it = losses.bg.find({gi, i, j});
      if (it == losses.bg.end()) {
        throw ValidationError("edge_terms: missing BG loss entry for graph " +
                              std::to_string(gi));
      }
      if (it->second < 0) throw ValidationError("edge_terms: negative BG loss");
      sum_bg += it->second;
    }
  }

  EdgeLossTerms t;
  t.m_fg = batch.m_fg;
  t.m_bg = batch.m_bg;
  t.l_fg = sum_fg / static_cast<double>(t.m_fg);
  t.l_bg = t.m_bg > 0 ? sum_bg / static_cast<double>(t.m_bg) : 0.0;
  return t;
}

LossValue baseline_loss(double l_node, const EdgeLossTerms& terms) {
  const double d = terms.density();
  LossValue v;
  v.l_node = l_node;
  v.edge = terms;
  v.total = l_node + (d * terms.l_fg + (1.0 - d) * terms.l_bg);
  return v;
}

LossValue normalized_loss(double l_node, const EdgeLossTerms& terms, double gamma) {
  if (terms.m_fg == 0) {
    throw DegenerateBatchError("normalized_loss: undefined for m_fg = 0");
  }
  if (gamma <= 0) {
    throw ValidationError("normalized_loss: gamma must be > 0");
  }
  const double ratio = static_cast<double>(terms.m_bg) / static_cast<double>(terms.m_fg);
  LossValue v;
  v.l_node = l_node;
  v.edge = terms;
  v.total = l_node + gamma * (terms.l_fg + ratio * terms.l_bg);
  return v;
}

LossValue tuned_loss(double l_node, const EdgeLossTerms& terms, const LossConfig& cfg) {
  validate_loss_config(cfg);
  LossValue v;
  v.l_node = l_node;
  v.edge = terms;
  if (cfg.variant == LossVariant::tuned_ab) {
    v.total = l_node + (cfg.alpha * terms.l_fg + cfg.beta * terms.l_bg);
  } else if (cfg.variant == LossVariant::tuned_lambda) {
    const double d = terms.density();
    v.total = l_node + cfg.lambda * (d * terms.l_fg + (1.0 - d) * terms.l_bg);
  } else {
    throw ValidationError("tuned_loss: variant must be tuned-ab or tuned-lambda");
  }
  return v;
}

LossValue compute_loss(double l_node, const EdgeLossTerms& terms, const LossConfig& cfg) {
  switch (cfg.variant) {
    case LossVariant::baseline: return baseline_loss(l_node, terms);
    case LossVariant::normalized: return normalized_loss(l_node, terms, cfg.gamma);
    case LossVariant::tuned_ab:
    case LossVariant::tuned_lambda: return tuned_loss(l_node, terms, cfg);
  }
  throw ValidationError("compute_loss: unknown variant");
}

GroupWeights group_edge_weights(std::size_t m_fg, std::size_t m_bg,
                                const LossConfig& cfg) {
  validate_loss_config(cfg);
  const std::size_t m = m_fg + m_bg;
  if (m == 0) {
    throw DegenerateInputError("group_edge_weights: empty pair universe");
  }
  GroupWeights w;
  switch (cfg.variant) {
    case LossVariant::baseline:
      w.fg = w.bg = 1.0 / static_cast<double>(m);
      break;
    case LossVariant::normalized:
      if (m_fg == 0) {
        throw DegenerateBatchError("group_edge_weights: normalized variant needs m_fg > 0");
      }
      // gamma * (L_FG + (m_bg/m_fg) L_BG) spreads to gamma/m_fg on every edge.
      w.fg = w.bg = cfg.gamma / static_cast<double>(m_fg);
      break;
    case LossVariant::tuned_ab:
      w.fg = m_fg > 0 ? cfg.alpha / static_cast<double>(m_fg) : 0.0;
      w.bg = m_bg > 0 ? cfg.beta / static_cast<double>(m_bg) : 0.0;
      break;
    case LossVariant::tuned_lambda:
      w.fg = w.bg = cfg.lambda / static_cast<double>(m);
      break;
  }
  return w;
}

PerEdgeWeights per_edge_weights(const Batch& batch, const LossConfig& cfg) {
  const GroupWeights w = group_edge_weights(batch.m_fg, batch.m_bg, cfg);
  PerEdgeWeights out;
  for (int gi = 0; gi < static_cast<int>(batch.graphs.size()); ++gi) {
    const SceneGraph& g = batch.graphs[gi];
    for (const FgEdge& e : g.fg_edges) {
      out.fg[{gi, e.subject, e.object}] = w.fg;
    }
    for (const auto& [i, j] : enumerate_bg_pairs(g)) {
      out.bg[{gi, i, j}] = w.bg;
    }
  }
  return out;
}

}  // namespace sgg
