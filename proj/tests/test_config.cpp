#include <doctest.h>

#include <string>

#include "deephedge/config.hpp"
#include "deephedge/errors.hpp"

using namespace dh;

namespace {

const char* kMinimal = R"(model: {}
payoff:
  kind: call
  strike: 1.0
architecture:
  variant: constrained
)";

std::string error_of(const std::string& text) {
  try {
    parse_run_config(text, "run.yaml");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("defaults") {
  const RunConfig cfg = parse_run_config(kMinimal, "run.yaml");
  CHECK(cfg.training.grid.t_end == 2.0);
  CHECK(cfg.training.grid.steps == 100);
  CHECK(cfg.training.loss.kind == LossKind::Combined);
  CHECK(cfg.training.loss.sf_weight == 5.0);
  CHECK(cfg.training.variant == Architecture::Constrained);
  CHECK(cfg.model.sigma_circ == 0.2);
  CHECK(cfg.model.jump_kappa == 0.1);
  CHECK(cfg.eval_paths == 100000);
  CHECK(cfg.train_lambdas == std::vector<double>{0.0, 0.5, 2.0});
}

TEST_CASE("values are read") {
  const RunConfig cfg = parse_run_config(R"(model: {r: 0.02, jump_lambda: 0.5}
grid: {horizon: 1.0, steps: 40}
payoff: {kind: equinox_full, strike: 1.0, barrier: 1.1, cash: 0.1, second_period: 0.5}
architecture: {variant: zero_target, hidden_layers: 2, width: 16}
loss: {kind: pl, lambda_terminal: 0.5}
training: {epochs: 10, n_train: 512, batch_paths: 16, strike: [0.8, 1.2], cash: 0.05, random_start: true}
equinox: {mode: single, discount: literal, g_values: [0, 0.1]}
seeds: {data: 9, init: 10}
)", "x.yaml");
  CHECK(cfg.model.r == 0.02);
  CHECK(cfg.training.grid.steps == 40);
  CHECK(cfg.training.payoff == PayoffSpec::equinox_full(1.0, 1.1, 0.1, 0.5));
  CHECK(cfg.training.variant == Architecture::ZeroTarget);
  CHECK(cfg.training.loss.kind == LossKind::ProfitAndLoss);
  CHECK(cfg.training.strike->lo == 0.8);
  CHECK(cfg.training.strike->hi == 1.2);
  CHECK(cfg.training.cash->is_fixed());
  CHECK(cfg.training.random_start);
  CHECK(cfg.equinox_mode == EquinoxMode::Single);
  CHECK(cfg.equinox_discount == EquinoxDiscount::Literal);
  CHECK(cfg.training.seed_data == 9);
  CHECK(cfg.eval_setup().seed != cfg.training.seed_data);
}

TEST_CASE("schema errors carry the location") {
  CHECK(error_of(std::string(kMinimal) + "bogus: 1\n").find("run.yaml:7:1: unknown section 'bogus'") !=
        std::string::npos);
  const std::string unknown_key = error_of("model: {}\npayoff:\n  kind: call\n  strik: 1.0\narchitecture: {variant: constrained}\n");
  CHECK(unknown_key.find("run.yaml:4:") != std::string::npos);
  CHECK(unknown_key.find("strik") != std::string::npos);
  const std::string missing = error_of("model: {}\npayoff:\n  strike: 1.0\narchitecture: {variant: constrained}\n");
  CHECK(missing.find("run.yaml:3:") != std::string::npos);
  CHECK(missing.find("payoff.kind") != std::string::npos);
  CHECK(error_of("model: {}\npayoff: {kind: call}\n").find("architecture.variant") != std::string::npos);
  CHECK(error_of("model: {}\npayoff: {kind: call}\narchitecture: {variant: resnet}\n").find("run.yaml:3:") !=
        std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "training: {epochs: many}\n").find("training.epochs") != std::string::npos);
  CHECK(error_of(std::string(kMinimal) + "training: {strike: [1.2, 0.8]}\n").find("run.yaml:") != std::string::npos);
  CHECK_FALSE(error_of("model: {gamma: 2}\npayoff: {kind: call}\narchitecture: {variant: constrained}\n").empty());
  CHECK_FALSE(error_of("model: [1, 2\n").empty());
  CHECK_THROWS_AS(load_run_config("/nonexistent/run.yaml"), ConfigError);
}

TEST_CASE("effective config round trip") {
  for (const char* text : {kMinimal, R"(model: {r: 0.01}
grid: {horizon: 0.5, steps: 7}
payoff: {kind: equinox_full, strike: 1.0, barrier: 1.1, cash: 0.1, second_period: 0.5}
architecture: {variant: control_variate}
training: {strike: [0.9, 1.1], call_strike: [1.1, 1.3]}
)"}) {
    const RunConfig a = parse_run_config(text, "a.yaml");
    const std::string yaml = effective_config_yaml(a);
    const RunConfig b = parse_run_config(yaml, "effective_config.yaml");
    CHECK(effective_config_yaml(b) == yaml);
    CHECK(b.training.payoff == a.training.payoff);
    CHECK(b.training.grid.steps == a.training.grid.steps);
    CHECK(b.model.r == a.model.r);
    CHECK(b.training.call_strike.lo == a.training.call_strike.lo);
  }
}
