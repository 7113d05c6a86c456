#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scanps/features.hpp"
#include "scanps/hetnet.hpp"
#include "scanps/learn.hpp"
#include "scanps/rng.hpp"
#include "scanps/sampling.hpp"

namespace scanps {

enum class MethodId {
  SCAN_PS,      // cross-network features + personalized sampling
  SCAN,         // cross-network features, old users unsampled
  SRC_ONLY,     // source-network features only
  TRAD_PS,      // target features, sampled old users
  TRAD,         // target features, all old users
  OLD_ONLY_PS,  // trained on sampled old users only
  OLD_ONLY,     // trained on all old users only
  NEW_ONLY,     // trained on new users' instances only
  NAIVE,        // predict the pseudo label directly
  CN,
  JC,
  AA,
};

inline constexpr MethodId kAllMethods[] = {
    MethodId::SCAN_PS, MethodId::SCAN,    MethodId::SRC_ONLY,    MethodId::TRAD_PS,
    MethodId::TRAD,    MethodId::OLD_ONLY_PS, MethodId::OLD_ONLY, MethodId::NEW_ONLY,
    MethodId::NAIVE,   MethodId::CN,      MethodId::JC,          MethodId::AA,
};

inline std::string method_name(MethodId m) {
  switch (m) {
    case MethodId::SCAN_PS: return "SCAN_PS";
    case MethodId::SCAN: return "SCAN";
    case MethodId::SRC_ONLY: return "SRC_ONLY";
    case MethodId::TRAD_PS: return "TRAD_PS";
    case MethodId::TRAD: return "TRAD";
    case MethodId::OLD_ONLY_PS: return "OLD_ONLY_PS";
    case MethodId::OLD_ONLY: return "OLD_ONLY";
    case MethodId::NEW_ONLY: return "NEW_ONLY";
    case MethodId::NAIVE: return "NAIVE";
    case MethodId::CN: return "CN";
    case MethodId::JC: return "JC";
    case MethodId::AA: return "AA";
  }
  throw std::invalid_argument("unknown method");
}

inline MethodId method_from_name(const std::string& name) {
  for (MethodId m : kAllMethods)
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

inline bool is_supervised(MethodId m) {
  return m != MethodId::NAIVE && m != MethodId::CN && m != MethodId::JC && m != MethodId::AA;
}

inline bool uses_old_instances(MethodId m) {
  switch (m) {
    case MethodId::SCAN_PS:
    case MethodId::SCAN:
    case MethodId::TRAD_PS:
    case MethodId::TRAD:
    case MethodId::OLD_ONLY_PS:
    case MethodId::OLD_ONLY:
      return true;
    default:
      return false;
  }
}

inline bool uses_new_training(MethodId m) {
  return is_supervised(m) && m != MethodId::OLD_ONLY && m != MethodId::OLD_ONLY_PS;
}

inline bool has_personalized_sampling(MethodId m) {
  return m == MethodId::SCAN_PS || m == MethodId::TRAD_PS || m == MethodId::OLD_ONLY_PS;
}

inline Layout method_layout(MethodId m) {
  switch (m) {
    case MethodId::SCAN_PS:
    case MethodId::SCAN:
      return Layout::Merged39;
    case MethodId::SRC_ONLY:
      return Layout::Source19;
    default:
      return Layout::Target19;
  }
}

struct MethodConfig {
  MethodId method = MethodId::SCAN_PS;
  double theta = 0.1;
  double rho = 0.5;        // retained old-user fraction under personalized sampling
  double ratio = 0.0;      // remaining-information ratio for new users
  std::uint64_t seed = 1;
  std::size_t folds = 5;
  double l2_lambda = 1e-3;
  std::size_t epochs = 500;
  std::optional<std::string> sampling_dump_path;
};

struct InstanceSet {
  std::vector<LinkInstance> new_side;  // cross-validated; labels from the unmodified target
  std::vector<LinkInstance> old_side;  // training-only extras, old-old pairs
  AlignedPair visible;                 // withheld target + untouched source
};

namespace detail {

inline std::pair<UserId, UserId> canonical(UserId a, UserId b) {
  return a < b ? std::pair{a, b} : std::pair{b, a};
}

// Uniformly samples `count` distinct pairs from `candidates` (consumed).
inline std::vector<std::pair<UserId, UserId>> sample_pairs(
    std::vector<std::pair<UserId, UserId>>&& candidates, std::size_t count, std::uint64_t seed,
    const char* what) {
  if (candidates.size() < count)
    throw std::runtime_error(std::string("not enough ") + what + " to sample: need " +
                             std::to_string(count) + ", have " + std::to_string(candidates.size()));
  Rng rng(seed);
  // partial Fisher-Yates: the first `count` slots end up a uniform sample
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(candidates.size() - i));
    std::swap(candidates[i], candidates[j]);
  }
  candidates.resize(count);
  std::sort(candidates.begin(), candidates.end());
  return std::move(candidates);
}

}  // namespace detail

// Builds the labeled instances for one (method, ratio, seed) cell.
//
// Positives are all links of the unmodified target network incident to at
// least one new user; negatives are an equal number of uniformly drawn
// non-links incident to a new user. Features always come from the
// information-withheld target network (and the untouched source); under
// personalized sampling the old-old instance set shrinks to the sampled
// subnetwork but feature values do not change.
inline InstanceSet build_instances(const AlignedPair& aligned, const UserPartition& partition,
                                   const MethodConfig& config) {
  const HeterogeneousNetwork& target = aligned.target();
  HeterogeneousNetwork withheld = withhold_information(
      target, partition.new_users, config.ratio, derive_seed(config.seed, "withhold"));
  InstanceSet out{.new_side = {}, .old_side = {}, .visible = aligned.with_target(std::move(withheld))};
  const FeatureExtractor extractor(out.visible);
  const Layout layout = method_layout(config.method);

  // New-user positives, in sorted pair order.
  std::vector<std::pair<UserId, UserId>> positives;
  for (const auto& [a, b] : target.links()) {
    if (partition.is_new(a) || partition.is_new(b)) positives.emplace_back(a, b);
  }

  // Candidate negatives: every non-link pair touching a new user.
  std::vector<std::pair<UserId, UserId>> candidates;
  std::vector<UserId> all_users = target.users();
  for (UserId u : partition.new_users) {
    for (UserId v : all_users) {
      if (v != u) candidates.push_back(detail::canonical(u, v));
    }
  }
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  std::erase_if(candidates, [&](const auto& p) { return target.has_link(p.first, p.second); });
  auto negatives = detail::sample_pairs(std::move(candidates), positives.size(),
                                        derive_seed(config.seed, "neg_new"), "new-user non-links");

  auto emit = [&](std::vector<LinkInstance>& dst, const std::pair<UserId, UserId>& p, int label) {
    // put a new user first so instance.u is the prediction target where possible
    UserId u = p.first;
    UserId v = p.second;
    if (!partition.is_new(u) && partition.is_new(v)) std::swap(u, v);
    dst.push_back(LinkInstance{u, v, extractor.extract(u, v, layout), label});
  };
  for (const auto& p : positives) emit(out.new_side, p, 1);
  for (const auto& p : negatives) emit(out.new_side, p, 0);

  if (!uses_old_instances(config.method)) return out;

  HeterogeneousNetwork old_subnet =
      induced_subnetwork(out.visible.target(), partition.old_users);
  if (has_personalized_sampling(config.method) && config.rho < 1.0) {
    SamplingProblem problem = make_sampling_problem(
        out.visible.target(), extractor.target_vectors(), old_subnet, partition.new_users,
        config.theta);
    SamplingDistribution dist = optimize_delta(problem);
    if (config.sampling_dump_path) {
      std::ofstream dump(*config.sampling_dump_path);
      if (!dump) throw std::runtime_error("cannot write " + *config.sampling_dump_path);
      dump << "kind,index,value\n";
      char buf[64];
      auto row = [&](const char* kind, std::size_t i, double x) {
        std::snprintf(buf, sizeof(buf), "%.17g", x);
        dump << kind << "," << i << "," << buf << "\n";
      };
      for (std::size_t i = 0; i < problem.s.size(); ++i) row("s", i, problem.s[i]);
      for (std::size_t i = 0; i < problem.N.size(); ++i) row("n_diag", i, problem.N.at(i, i));
      for (std::size_t i = 0; i < dist.delta.size(); ++i) row("delta", i, dist.delta[i]);
      for (std::size_t i = 0; i < dist.objective_trace.size(); ++i)
        row("objective", i, dist.objective_trace[i]);
    }
    old_subnet = sample_old_users(old_subnet, dist.delta, config.rho,
                                  derive_seed(config.seed, "old_sample"));
  }

  std::vector<std::pair<UserId, UserId>> old_positives = old_subnet.links();
  std::vector<UserId> old_ids = old_subnet.users();
  std::vector<std::pair<UserId, UserId>> old_candidates;
  for (std::size_t i = 0; i < old_ids.size(); ++i) {
    for (std::size_t j = i + 1; j < old_ids.size(); ++j) {
      if (!old_subnet.has_link(old_ids[i], old_ids[j]))
        old_candidates.emplace_back(old_ids[i], old_ids[j]);
    }
  }
  auto old_negatives = detail::sample_pairs(std::move(old_candidates), old_positives.size(),
                                            derive_seed(config.seed, "neg_old"), "old-old non-links");
  for (const auto& p : old_positives) emit(out.old_side, p, 1);
  for (const auto& p : old_negatives) emit(out.old_side, p, 0);
  return out;
}

struct FoldResult {
  std::optional<double> auc;
  std::optional<double> accuracy;
};

// Runs one method for one seed: k-fold cross validation over the new-user
// instances, with old-user instances (when the method uses them) appended to
// every training fold and never to a test fold.
inline std::vector<FoldResult> run_method(const AlignedPair& aligned,
                                          const UserPartition& partition,
                                          const MethodConfig& config) {
  InstanceSet iset = build_instances(aligned, partition, config);
  auto folds = kfold_split(iset.new_side, config.folds, derive_seed(config.seed, "folds"));

  std::vector<FoldResult> results;
  results.reserve(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto& test_idx = folds[f];
    FoldResult fold_result;
    if (is_supervised(config.method)) {
      std::vector<LinkInstance> training;
      if (uses_new_training(config.method)) {
        for (std::size_t g = 0; g < folds.size(); ++g) {
          if (g == f) continue;
          for (std::size_t i : folds[g]) training.push_back(iset.new_side[i]);
        }
      }
      if (uses_old_instances(config.method))
        training.insert(training.end(), iset.old_side.begin(), iset.old_side.end());
      LinearModel model = train(training, config.l2_lambda, config.epochs, config.seed);
      std::vector<double> scores;
      std::vector<int> predictions;
      std::vector<int> labels;
      scores.reserve(test_idx.size());
      for (std::size_t i : test_idx) {
        double z = score(model, iset.new_side[i].features);
        scores.push_back(z);
        predictions.push_back(z > 0.0 ? 1 : 0);
        labels.push_back(iset.new_side[i].label);
      }
      fold_result.auc = auc(scores, labels);
      fold_result.accuracy = accuracy(predictions, labels);
    } else if (config.method == MethodId::NAIVE) {
      std::vector<int> predictions;
      std::vector<int> labels;
      for (std::size_t i : test_idx) {
        predictions.push_back(pseudo_label(iset.visible, iset.new_side[i].u, iset.new_side[i].v));
        labels.push_back(iset.new_side[i].label);
      }
      fold_result.accuracy = accuracy(predictions, labels);
    } else {
      const HeterogeneousNetwork& net = iset.visible.target();
      std::vector<double> scores;
      std::vector<int> labels;
      for (std::size_t i : test_idx) {
        const LinkInstance& inst = iset.new_side[i];
        double s = 0.0;
        switch (config.method) {
          case MethodId::CN:
            s = static_cast<double>(common_neighbors(net, inst.u, inst.v));
            break;
          case MethodId::JC:
            s = jaccard(net, inst.u, inst.v);
            break;
          case MethodId::AA:
            s = adamic_adar(net, inst.u, inst.v);
            break;
          default:
            throw std::logic_error("unreachable");
        }
        scores.push_back(s);
        labels.push_back(inst.label);
      }
      fold_result.auc = auc(scores, labels);
    }
    results.push_back(std::move(fold_result));
  }
  return results;
}

}  // namespace scanps
