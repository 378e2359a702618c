// Copyright 2026 The mlat Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Diverse beam search: beams are partitioned into groups decoded in order;
// within a time step, a token already chosen by an earlier group is
// penalized in later groups' selection scores. Top-p truncates each step's
// expansion distribution; length bounds are functions of the padded batch
// length.

#ifndef MLAT_DECODE_HPP_
#define MLAT_DECODE_HPP_

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <vector>

#include "mlat/error.hpp"
#include "mlat/nn.hpp"

namespace mlat {

struct DecodeConfig {
  int num_candidates = 32;  // n
  int num_beams = 32;
  int num_beam_groups = 16;
  double diversity_penalty = 1.0;
  double top_p = 0.98;
  double temperature = 1.0;
  int batch_length = 1;  // the padded generated-length variable l

  void validate() const;

  int min_length() const;  // max(0, l - 2 - floor(l/4))
  int max_length() const;  // l + 2
};

struct BeamCandidate {
  std::vector<int> tokens;  // generated ids, EOS stripped
  double logprob = 0;       // accumulated raw log probability
  int group = 0;
};

namespace detail {

inline bool candidate_less(const BeamCandidate& a, const BeamCandidate& b) {
  if (a.logprob != b.logprob) return a.logprob > b.logprob;
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.group < b.group;
}

}  // namespace detail

template <typename T>
std::vector<BeamCandidate> diverse_beam_search(const nn::Seq2Seq<T>& model,
                                               const std::vector<int>& src,
                                               const DecodeConfig& cfg) {
  cfg.validate();
  const int eos = model.eos();
  const int groups = cfg.num_beam_groups;
  const int width = cfg.num_beams / groups;
  const int min_len = cfg.min_length();
  const int max_len = cfg.max_length();
  const double neg_inf = -std::numeric_limits<double>::infinity();

  auto enc = model.encode_values(src);

  struct Beam {
    std::vector<int> tokens;
    Mat<T> h;
    int prev;
    double score;
  };
  struct Expansion {
    int beam;
    int token;
    double raw_score;  // accumulated log probability
    double sel_score;  // raw minus diversity penalty
  };

  std::vector<std::vector<Beam>> live(groups);
  std::vector<std::vector<BeamCandidate>> finished(groups);
  for (int g = 0; g < groups; ++g)
    live[g].push_back(Beam{{}, enc.h_last, model.decoder_start(), 0.0});

  for (int step = 0; step <= max_len; ++step) {
    std::map<int, int> step_counts;  // token -> selections by earlier groups
    bool any_live = false;
    for (int g = 0; g < groups; ++g) {
      if (live[g].empty()) continue;
      any_live = true;

      std::vector<Expansion> exps;
      std::vector<Mat<T>> next_h(live[g].size());
      for (size_t b = 0; b < live[g].size(); ++b) {
        const Beam& beam = live[g][b];
        auto sv = model.step_values(beam.h, beam.prev, enc.h_enc);
        next_h[b] = std::move(sv.h);
        const int v = sv.logits.cols;
        std::vector<double> lp(v);
        {
          double mx = neg_inf;
          for (int c = 0; c < v; ++c) {
            lp[c] = static_cast<double>(sv.logits(0, c)) / cfg.temperature;
            mx = std::max(mx, lp[c]);
          }
          double lse = 0;
          for (int c = 0; c < v; ++c) lse += std::exp(lp[c] - mx);
          lse = mx + std::log(lse);
          for (int c = 0; c < v; ++c) lp[c] -= lse;
        }

        std::vector<bool> allowed(v, false);
        if (step == max_len) {
          allowed[eos] = true;  // force termination at the length cap
        } else {
          // Nucleus truncation of the expansion distribution.
          std::vector<int> order(v);
          for (int c = 0; c < v; ++c) order[c] = c;
          std::sort(order.begin(), order.end(), [&](int x, int y) {
            if (lp[x] != lp[y]) return lp[x] > lp[y];
            return x < y;
          });
          double cum = 0;
          for (int c : order) {
            allowed[c] = true;
            cum += std::exp(lp[c]);
            if (cum >= cfg.top_p) break;
          }
          if (step < min_len) allowed[eos] = false;
          bool any = false;
          for (int c = 0; c < v; ++c) any = any || allowed[c];
          if (!any) {
            // The nucleus contained only the banned EOS; take the best
            // remaining token instead.
            int best = -1;
            for (int c = 0; c < v; ++c)
              if (c != eos && (best < 0 || lp[c] > lp[best])) best = c;
            allowed[best] = true;
          }
        }

        for (int c = 0; c < v; ++c) {
          if (!allowed[c]) continue;
          double raw = beam.score + lp[c];
          double penalty = 0;
          auto it = step_counts.find(c);
          if (it != step_counts.end()) penalty = cfg.diversity_penalty * it->second;
          exps.push_back(Expansion{static_cast<int>(b), c, raw, raw - penalty});
        }
      }

      std::sort(exps.begin(), exps.end(), [](const Expansion& a, const Expansion& b) {
        if (a.sel_score != b.sel_score) return a.sel_score > b.sel_score;
        if (a.token != b.token) return a.token < b.token;
        return a.beam < b.beam;
      });

      std::vector<Beam> next_live;
      size_t limit = std::min(exps.size(), static_cast<size_t>(2 * width));
      for (size_t i = 0; i < limit && static_cast<int>(next_live.size()) < width; ++i) {
        const Expansion& e = exps[i];
        step_counts[e.token]++;
        if (e.token == eos) {
          finished[g].push_back(BeamCandidate{live[g][e.beam].tokens, e.raw_score, g});
        } else {
          Beam nb;
          nb.tokens = live[g][e.beam].tokens;
          nb.tokens.push_back(e.token);
          nb.h = next_h[e.beam];
          nb.prev = e.token;
          nb.score = e.raw_score;
          next_live.push_back(std::move(nb));
        }
      }
      live[g] = std::move(next_live);
      if (step == max_len) live[g].clear();
    }
    if (!any_live) break;
  }

  // Prune per group, then pool and rank.
  std::vector<BeamCandidate> all;
  for (int g = 0; g < groups; ++g) {
    std::sort(finished[g].begin(), finished[g].end(), detail::candidate_less);
    if (static_cast<int>(finished[g].size()) > width) finished[g].resize(width);
    all.insert(all.end(), finished[g].begin(), finished[g].end());
  }
  std::sort(all.begin(), all.end(), detail::candidate_less);
  if (static_cast<int>(all.size()) > cfg.num_candidates) all.resize(cfg.num_candidates);
  return all;
}

}  // namespace mlat

#endif  // MLAT_DECODE_HPP_
