#include "aircast/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aircast/models.hpp"
#include "aircast/rng.hpp"

namespace aircast {

namespace {

constexpr std::uint64_t kCoordTag = 0x636f6f7264ULL;  // "coord"
constexpr std::uint64_t kJudgeTag = 0x6a75646765ULL;  // "judge"

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument(message);
}

}  // namespace

const GradCheckCoord* GradCheckReport::worst() const {
  const GradCheckCoord* w = nullptr;
  for (const GradCheckCoord& c : coords)
    if (!w || c.rel_error > w->rel_error) w = &c;
  return w;
}

GradCheckReport finite_diff_check(std::vector<Parameter>& params, const LossFn& loss,
                                  const GradCheckConfig& config) {
  require(config.step > 0.0, "gradcheck: step must be positive");
  require(config.tolerance > 0.0, "gradcheck: tolerance must be positive");
  require(config.max_coords >= 1, "gradcheck: max_coords must be at least 1");
  require(!params.empty(), "gradcheck: no parameters");

  Index total = 0;
  for (const Parameter& p : params) total += p.value.size();
  require(total >= 1, "gradcheck: parameters are empty");

  for (Parameter& p : params) p.grad.data.setZero();
  (void)loss(params, /*with_grads=*/true);

  std::vector<Index> flats;
  if (total <= config.max_coords) {
    flats.resize(static_cast<std::size_t>(total));
    for (Index i = 0; i < total; ++i) flats[static_cast<std::size_t>(i)] = i;
  } else {
    Rng rng(mix_seed({config.seed, kCoordTag}));
    for (std::int64_t v : rng.sample_without_replacement(total, config.max_coords))
      flats.push_back(v);
    std::sort(flats.begin(), flats.end());
  }

  GradCheckReport report;
  report.total_coords = total;
  report.tolerance = config.tolerance;
  report.coords.reserve(flats.size());

  for (Index flat : flats) {
    // Locate the parameter owning this flat coordinate.
    std::size_t pi = 0;
    Index offset = flat;
    while (offset >= params[pi].value.size()) {
      offset -= params[pi].value.size();
      ++pi;
    }
    Parameter& p = params[pi];

    const double analytic = p.grad.data[offset];
    const double saved = p.value.data[offset];
    p.value.data[offset] = saved + config.step;
    const double up = loss(params, /*with_grads=*/false);
    p.value.data[offset] = saved - config.step;
    const double down = loss(params, /*with_grads=*/false);
    p.value.data[offset] = saved;

    const double numeric = (up - down) / (2.0 * config.step);
    double rel;
    if (std::isfinite(analytic) && std::isfinite(numeric)) {
      rel = std::abs(analytic - numeric) /
            std::max({1.0, std::abs(analytic), std::abs(numeric)});
    } else {
      rel = std::numeric_limits<double>::infinity();
    }
    report.coords.push_back({p.id, offset, analytic, numeric, rel});
    if (rel > report.max_rel_error) report.max_rel_error = rel;
  }

  report.passed = report.max_rel_error <= config.tolerance;
  return report;
}

GradCheckReport check_gradients(Model& model, const std::vector<Sample>& batch,
                                const GradCheckConfig& config) {
  require(!batch.empty(), "gradcheck: empty batch");
  const double inv = 1.0 / static_cast<double>(batch.size());
  const std::uint64_t seed = config.seed;

  LossFn loss = [&model, &batch, inv, seed](std::vector<Parameter>&, bool with_grads) {
    Tape tape;
    const TapeBinding binding = bind_parameters(model, tape, with_grads);
    Rng drop_rng(mix_seed({seed, kJudgeTag}));
    Value total{};
    bool first = true;
    for (const Sample& s : batch) {
      const Value logits = model_forward(model, binding, s.window, drop_rng, /*training=*/true);
      const Value li = softmax_crossentropy(tape, logits, level_index(s.label));
      total = first ? li : add(tape, total, li);
      first = false;
    }
    const Value mean = scale(tape, total, inv);
    const double value = tape.value(mean).data[0];
    if (with_grads) {
      tape.backward(mean);
      for (std::size_t i = 0; i < model.params.size(); ++i)
        model.params[i].grad = tape.grad(binding.params[i]);
    }
    return value;
  };

  return finite_diff_check(model.params, loss, config);
}

}  // namespace aircast
