#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "vgvae/autodiff.hpp"
#include "vgvae/data_io.hpp"
#include "vgvae/random.hpp"

namespace vgvae::testing {

/// Builds a scalar loss on the given tape.
using LossFn = std::function<Tensor(Tape&)>;

struct GradReport {
  double max_rel = 0.0;  // worst relative error over checked tensors
  std::string worst;     // "name[index]" of the worst entry
  std::size_t checked = 0;
};

inline double eval_loss(const LossFn& f) {
  Tape t(GradMode::frozen);
  return f(t).item();
}

/// Compare analytic gradients of `f` with central differences for the given
/// parameters. Error of a tensor is max|analytic - numeric| divided by
/// max(max|analytic|, max|numeric|, floor). `per_tensor` limits the entries
/// probed per tensor (0 = all), chosen with `rng`.
inline GradReport check_gradients(const std::vector<Parameter*>& params, const LossFn& f, double h = 1e-5,
                                  std::size_t per_tensor = 0, std::uint64_t seed = 7, double floor = 1e-6) {
  for (Parameter* p : params) p->zero_grad();
  {
    Tape t;
    Tensor loss = f(t);
    t.backward(loss);
  }
  GradReport rep;
  Rng rng(seed);
  for (Parameter* p : params) {
    std::vector<std::size_t> idx;
    if (per_tensor == 0 || per_tensor >= p->size()) {
      for (std::size_t i = 0; i < p->size(); ++i) idx.push_back(i);
    } else {
      for (std::size_t k = 0; k < per_tensor; ++k) idx.push_back(rng.below(p->size()));
    }
    double max_diff = 0.0, scale = floor;
    std::size_t worst = 0;
    for (std::size_t i : idx) {
      const double orig = p->value[i];
      p->value[i] = orig + h;
      const double fp = eval_loss(f);
      p->value[i] = orig - h;
      const double fm = eval_loss(f);
      p->value[i] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = p->grad[i];
      const double diff = std::abs(num - ana);
      if (diff > max_diff) {
        max_diff = diff;
        worst = i;
      }
      scale = std::max({scale, std::abs(num), std::abs(ana)});
      ++rep.checked;
    }
    const double rel = max_diff / scale;
    if (rel >= rep.max_rel) {
      rep.max_rel = rel;
      rep.worst = p->name + "[" + std::to_string(worst) + "]";
    }
  }
  return rep;
}

inline Parameter random_param(const std::string& name, Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Parameter p(name, std::move(shape));
  for (double& v : p.value) v = rng.uniform(lo, hi);
  return p;
}

/// Random ordered labeled tree with `nodes` nodes; labels drawn from
/// `labels`. Leaves are label-only (stripped) nodes.
inline ParseTree random_tree(std::size_t nodes, const std::vector<std::string>& labels, Rng& rng) {
  ParseTree t;
  t.label = labels[rng.below(labels.size())];
  std::size_t remaining = nodes - 1;
  while (remaining > 0) {
    const std::size_t take = 1 + rng.below(remaining);
    t.children.push_back(random_tree(take, labels, rng));
    remaining -= take;
  }
  return t;
}

/// Random parse tree with word leaves under preterminals.
inline ParseTree random_parse(Rng& rng, int depth = 0) {
  static const std::vector<std::string> phrase = {"S", "NP", "VP", "PP", "SBAR", "ADJP"};
  static const std::vector<std::string> tags = {"DT", "NN", "VBD", "JJ", "IN", ".", "PRP$", "-LRB-"};
  static const std::vector<std::string> words = {"the", "dog", "ran", "big", "on", ".", "its", "'s", "a-b", "x1"};
  ParseTree t;
  const bool pre = depth > 0 && (depth >= 4 || rng.uniform() < 0.4);
  if (pre) {
    t.label = tags[rng.below(tags.size())];
    ParseTree w;
    w.token = words[rng.below(words.size())];
    t.children.push_back(w);
    return t;
  }
  t.label = phrase[rng.below(phrase.size())];
  const std::size_t n = 1 + rng.below(3);
  for (std::size_t i = 0; i < n; ++i) t.children.push_back(random_parse(rng, depth + 1));
  return t;
}

}  // namespace vgvae::testing
