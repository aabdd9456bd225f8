#include "vnoip/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <thread>

#include "vnoip/errors.hpp"
#include "vnoip/ops.hpp"
#include "vnoip/rng.hpp"

namespace vnoip {

namespace {

Tensor draw_noise(Rng rng, std::int64_t dim) {
  Tensor noise = Tensor::zeros({dim});
  for (double& v : noise.values()) v = rng.normal();
  return noise;
}

}  // namespace

double msle_term(double truth, double prediction) {
  const double d = log2p1(truth) - log2p1(prediction);
  return d * d;
}

double mape_term(double truth, double prediction) {
  const double denom = std::log2(truth + 2.0);
  return std::abs(denom - std::log2(prediction + 2.0)) / denom;
}

EvalResult evaluate(const std::vector<CascadeSample>& samples, const ModelParams& params,
                    int threads) {
  EvalResult out;
  out.records.resize(samples.size());

  auto run_range = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      out.records[i] = EvalRecord{samples[i].cascade_id, samples[i].delta_popularity,
                                  predict(params, samples[i])};
    }
  };

  if (threads <= 1 || samples.size() < 2) {
    run_range(0, samples.size());
  } else {
    const std::size_t n_workers =
        std::min<std::size_t>(static_cast<std::size_t>(threads), samples.size());
    std::vector<std::thread> pool;
    const std::size_t chunk = (samples.size() + n_workers - 1) / n_workers;
    for (std::size_t w = 0; w < n_workers; ++w) {
      const std::size_t lo = w * chunk;
      const std::size_t hi = std::min(samples.size(), lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(run_range, lo, hi);
    }
    for (auto& t : pool) t.join();
  }

  // Sorted-term reduction: metrics are bit-identical for any sample order or
  // thread count.
  std::vector<double> msle_terms, mape_terms;
  msle_terms.reserve(out.records.size());
  mape_terms.reserve(out.records.size());
  for (const EvalRecord& r : out.records) {
    msle_terms.push_back(msle_term(r.truth, r.prediction));
    mape_terms.push_back(mape_term(r.truth, r.prediction));
  }
  std::sort(msle_terms.begin(), msle_terms.end());
  std::sort(mape_terms.begin(), mape_terms.end());
  for (double v : msle_terms) out.msle += v;
  for (double v : mape_terms) out.mape += v;
  if (!out.records.empty()) {
    out.msle /= static_cast<double>(out.records.size());
    out.mape /= static_cast<double>(out.records.size());
  }
  return out;
}

std::vector<CascadeSample> featurize(const std::vector<Cascade>& cascades,
                                     const EmbeddingTable& global_table, double t_obs,
                                     double t_pred, std::int64_t grid_points,
                                     const GraphWaveConfig& gw, bool inference) {
  std::vector<CascadeSample> out;
  out.reserve(cascades.size());
  for (const Cascade& c : cascades) {
    out.push_back(build_sample(c, global_table, t_obs, t_pred, grid_points, gw, inference));
  }
  return out;
}

TrainResult train_model(const std::vector<CascadeSample>& train_set,
                        const std::vector<CascadeSample>& val_set, const TrainConfig& cfg,
                        std::ostream* log) {
  if (train_set.empty() || val_set.empty()) {
    throw ConfigError("train_model: train and validation splits must be non-empty");
  }

  ModelParams params = ModelParams::init(cfg.hp, cfg.seed);
  HyperParams hp = cfg.hp;
  AdamConfig adam_cfg;
  adam_cfg.learning_rate = cfg.learning_rate;
  AdamOptimizer adam(adam_cfg);
  const Rng base(cfg.seed);

  TrainResult result{params, 0, std::numeric_limits<double>::infinity(), {}};

  std::vector<std::size_t> order(train_set.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Rng shuffle_rng = base.split(0x53 + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[static_cast<std::size_t>(
                                  shuffle_rng.uniform_int(static_cast<std::int64_t>(i)))]);
    }

    double epoch_loss = 0.0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end =
          std::min(order.size(), cursor + static_cast<std::size_t>(cfg.batch_size));
      std::map<std::string, std::vector<double>> grad_acc;
      const double inv_batch = 1.0 / static_cast<double>(batch_end - cursor);

      for (std::size_t b = cursor; b < batch_end; ++b) {
        const CascadeSample& sample = train_set[order[b]];
        const Tensor noise =
            draw_noise(base.split((static_cast<std::uint64_t>(epoch) << 32) ^
                                  static_cast<std::uint64_t>(order[b])),
                       hp.latent_dim);

        Tape tape;
        ModelParams bound = params.bound_to(tape);
        ForwardStats stats;
        Tensor loss = forward_loss(bound, sample, noise, &stats);
        const double loss_value = loss.item();
        if (!std::isfinite(loss_value)) {
          std::ostringstream os;
          os << "NaN loss at epoch " << epoch << ", cascade " << sample.cascade_id
             << " (main=" << stats.main << ", rg=" << stats.rg << ", kl=" << stats.kl
             << ", kd=" << stats.kd << ")";
          throw NumericError(os.str());
        }
        epoch_loss += loss_value;

        GradientMap grads = tape.backward(loss);
        bound.visit([&](const std::string& name, Tensor& leaf) {
          if (!grads.contains(leaf)) return;
          const Tensor& g = grads.at(leaf);
          auto& acc = grad_acc[name];
          if (acc.empty()) acc.assign(g.values().size(), 0.0);
          for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += g.values()[i] * inv_batch;
        });
      }
      adam.step(params, grad_acc);
      cursor = batch_end;
    }
    epoch_loss /= static_cast<double>(train_set.size());

    const double val_msle = evaluate(val_set, params, cfg.threads).msle;
    result.history.push_back(EpochRecord{epoch, epoch_loss, val_msle});
    if (log) {
      (*log) << "{\"event\":\"epoch\",\"epoch\":" << epoch << ",\"train_loss\":" << epoch_loss
             << ",\"val_msle\":" << val_msle << "}\n";
    }

    if (val_msle < result.best_val_msle) {
      result.best_val_msle = val_msle;
      result.best_epoch = epoch;
      result.params = params;
    } else if (epoch - result.best_epoch >= cfg.patience) {
      break;  // stops at exactly best_epoch + patience
    }
  }
  return result;
}

}  // namespace vnoip
