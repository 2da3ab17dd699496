#include <algorithm>
#include <cmath>
#include <numeric>
#include <mutex>
#include <thread>

#include "ipag/hagnn.hpp"
#include "ipag/simd.hpp"

namespace ipag {

namespace {

// Runs fn(i) for i in [0, n) on up to `jobs` threads.
template <class Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn fn) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex m;
  for (unsigned w = 0; w < jobs; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

double accuracy_of(const HagnnModel& model, const std::vector<EmbeddedGraph>& corpus, unsigned jobs) {
  std::vector<char> right(corpus.size());
  parallel_for(corpus.size(), jobs,
               [&](std::size_t i) { right[i] = is_vulnerable(model.score(corpus[i])) == *corpus[i].vulnerable; });
  return static_cast<double>(std::count(right.begin(), right.end(), 1)) / static_cast<double>(corpus.size());
}

}  // namespace

TrainResult train(const std::vector<EmbeddedGraph>& corpus, const HagnnConfig& config,
                  const PropertyVocabulary& vocab, const EpochCallback& on_epoch) {
  return train_from(HagnnModel(config, vocab), corpus, on_epoch);
}

TrainResult train_from(HagnnModel start, const std::vector<EmbeddedGraph>& corpus, const EpochCallback& on_epoch) {
  if (corpus.size() < 2) throw ModelError("training needs at least two graphs");
  bool pos = false, neg = false;
  for (const auto& g : corpus) {
    if (!g.vulnerable) throw ModelError(g.name + ": training graph has no label");
    (*g.vulnerable ? pos : neg) = true;
  }
  if (!pos || !neg) throw ModelError("training needs both vulnerable and non-vulnerable graphs");

  TrainResult result{std::move(start), {}, false, {}};
  HagnnModel& model = result.model;
  const HagnnConfig cfg = model.config();
  auto& params = model.parameters();
  std::mt19937_64 rng(cfg.seed ^ 0x5eedULL);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::vector<Matrix> snapshot;
    snapshot.reserve(params.size());
    for (const auto& p : params) snapshot.push_back(p.value);
    std::shuffle(order.begin(), order.end(), rng);

    double total = 0.0;
    for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - b);
      std::vector<Gradients> grads(n);
      std::vector<double> loss(n);
      parallel_for(n, cfg.jobs, [&](std::size_t i) { loss[i] = model.loss_and_gradients(corpus[order[b + i]], grads[i]); });
      // Fixed reduction order: batch position, then parameter index.
      double batch_loss = 0.0;
      for (double l : loss) batch_loss += l;
      if (!std::isfinite(batch_loss)) {
        for (std::size_t i = 0; i < params.size(); ++i) params[i].value = std::move(snapshot[i]);
        result.diverged = true;
        result.message = "non-finite loss in epoch " + std::to_string(epoch) + "; weights restored to the start of the epoch";
        return result;
      }
      total += batch_loss;
      if (cfg.learning_rate == 0.0) continue;
      Gradients sum;
      for (auto& g : grads)
        for (auto& [idx, m] : g) {
          auto [it, fresh] = sum.try_emplace(idx, std::move(m));
          if (!fresh) simd::scalar::axpy(1.0, m.data.data(), it->second.data.data(), m.size());
        }
      const double step = cfg.learning_rate / static_cast<double>(n);
      for (auto& [idx, g] : sum) {
        auto& v = params[idx].value.data;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= step * g.data[i];
      }
    }
    if (!model.all_finite()) {
      for (std::size_t i = 0; i < params.size(); ++i) params[i].value = std::move(snapshot[i]);
      result.diverged = true;
      result.message = "non-finite weights in epoch " + std::to_string(epoch) + "; weights restored to the start of the epoch";
      return result;
    }
    EpochStats stats{epoch, total / static_cast<double>(corpus.size()), accuracy_of(model, corpus, cfg.jobs)};
    result.history.push_back(stats);
    if (on_epoch && !on_epoch(stats)) break;
  }
  return result;
}

Metrics metrics_from(const Confusion& c) {
  auto ratio = [](double num, double den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return num / den;
  };
  Metrics m;
  m.counts = c;
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn), fp = static_cast<double>(c.fp),
               fn = static_cast<double>(c.fn);
  m.accuracy = ratio(tp + tn, tp + tn + fp + fn);
  m.precision = ratio(tp, tp + fp);
  m.recall = ratio(tp, tp + fn);
  if (m.precision && m.recall) m.f1 = ratio(2 * *m.precision * *m.recall, *m.precision + *m.recall);
  m.fpr = ratio(fp, fp + tn);
  m.fnr = ratio(fn, fn + tp);
  return m;
}

std::optional<double> geometric_mean(const std::vector<std::optional<double>>& values) {
  double log_sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (!v) continue;
    if (*v <= 0.0) return 0.0;
    log_sum += std::log(*v);
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::exp(log_sum / static_cast<double>(n));
}

std::vector<int> stratified_folds(const std::vector<EmbeddedGraph>& corpus, int folds, std::uint64_t seed) {
  if (folds < 2) throw ModelError("need at least two folds");
  if (corpus.size() < static_cast<std::size_t>(folds))
    throw ModelError("corpus of " + std::to_string(corpus.size()) + " graphs is smaller than " + std::to_string(folds) +
                     " folds");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].vulnerable) throw ModelError(corpus[i].name + ": evaluation graph has no label");
    (*corpus[i].vulnerable ? pos : neg).push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pos.begin(), pos.end(), rng);
  std::shuffle(neg.begin(), neg.end(), rng);
  std::vector<int> out(corpus.size());
  // Negatives continue the round robin where positives stopped so fold sizes
  // differ by at most one.
  std::size_t at = 0;
  for (auto i : pos) out[i] = static_cast<int>(at++ % static_cast<std::size_t>(folds));
  for (auto i : neg) out[i] = static_cast<int>(at++ % static_cast<std::size_t>(folds));
  return out;
}

EvalReport evaluate(const std::vector<EmbeddedGraph>& corpus, const HagnnConfig& config,
                    const PropertyVocabulary& vocab, int folds) {
  const auto fold = stratified_folds(corpus, folds, config.seed);
  EvalReport report;
  Confusion all;
  for (int f = 0; f < folds; ++f) {
    std::vector<EmbeddedGraph> train_set, test_set;
    for (std::size_t i = 0; i < corpus.size(); ++i) (fold[i] == f ? test_set : train_set).push_back(corpus[i]);
    const auto trained = train(train_set, config, vocab);
    if (trained.diverged) throw ModelError("fold " + std::to_string(f + 1) + ": " + trained.message);
    Confusion c;
    const auto preds = predict(trained.model, test_set);
    for (std::size_t i = 0; i < preds.size(); ++i) {
      const bool said = preds[i].vulnerable;
      const bool truth = *test_set[i].vulnerable;
      if (said && truth) ++c.tp;
      if (!said && !truth) ++c.tn;
      if (said && !truth) ++c.fp;
      if (!said && truth) ++c.fn;
    }
    all.tp += c.tp;
    all.tn += c.tn;
    all.fp += c.fp;
    all.fn += c.fn;
    report.folds.push_back(metrics_from(c));
  }
  report.mean.counts = all;
  auto gm = [&](auto member) {
    std::vector<std::optional<double>> v;
    for (const auto& m : report.folds) v.push_back(m.*member);
    return geometric_mean(v);
  };
  report.mean.accuracy = gm(&Metrics::accuracy);
  report.mean.precision = gm(&Metrics::precision);
  report.mean.recall = gm(&Metrics::recall);
  report.mean.f1 = gm(&Metrics::f1);
  report.mean.fpr = gm(&Metrics::fpr);
  report.mean.fnr = gm(&Metrics::fnr);
  return report;
}

std::vector<Prediction> predict(const HagnnModel& model, const std::vector<EmbeddedGraph>& corpus) {
  std::vector<Prediction> out(corpus.size());
  parallel_for(corpus.size(), model.config().jobs, [&](std::size_t i) {
    const double s = model.score(corpus[i]);
    out[i] = {corpus[i].name, s, is_vulnerable(s)};
  });
  return out;
}

}  // namespace ipag
