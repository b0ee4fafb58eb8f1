#include "deephedge/checkpoint.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "deephedge/errors.hpp"

namespace dh {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json payoff_to_json(const PayoffSpec& p) {
  json j{{"kind", std::string(to_string(p.kind))}, {"strike", p.strike}};
  if (p.barrier) j["barrier"] = *p.barrier;
  if (p.cash) j["cash"] = *p.cash;
  if (p.second_period) j["second_period"] = *p.second_period;
  return j;
}

PayoffSpec payoff_from_json(const json& j) {
  PayoffSpec p;
  p.kind = parse_payoff_kind(j.at("kind").get<std::string>());
  p.strike = j.at("strike").get<double>();
  if (j.contains("barrier")) p.barrier = j["barrier"].get<double>();
  if (j.contains("cash")) p.cash = j["cash"].get<double>();
  if (j.contains("second_period")) p.second_period = j["second_period"].get<double>();
  p.validate();
  return p;
}

json model_to_json(const PricedModel& model) {
  const NetworkShape& shape = model.network().shape;
  json j;
  j["shape"] = {{"inputs", shape.inputs}, {"hidden_layers", shape.hidden_layers}, {"width", shape.width}};
  j["activation"] = "tanh";
  j["theta"] = vector_to_json(model.network().theta);
  j["architecture"] = std::string(to_string(model.architecture()));
  j["payoff"] = payoff_to_json(model.payoff());
  j["horizon"] = model.horizon();
  j["baseline"] = model.baseline() ? model.baseline().id() : std::string();
  if (const auto& source = model.baseline_source()) {
    j["sigma_circ"] = source->sigma_circ;
    j["r"] = source->r;
    if (source->call_model) j["call_model"] = model_to_json(*source->call_model);
  }
  return j;
}

std::shared_ptr<PricedModel> model_from_json(const json& j) {
  if (j.at("activation").get<std::string>() != "tanh") throw std::invalid_argument("unsupported activation");
  const json& s = j.at("shape");
  const NetworkShape shape{s.at("inputs").get<int>(), s.at("hidden_layers").get<int>(), s.at("width").get<int>()};
  shape.validate();
  NetworkParams net(shape, vector_from_json(j.at("theta")));
  const Architecture arch = parse_architecture(j.at("architecture").get<std::string>());
  const PayoffSpec payoff = payoff_from_json(j.at("payoff"));
  ModelParams market;
  market.sigma_circ = j.value("sigma_circ", market.sigma_circ);
  market.r = j.value("r", market.r);
  std::shared_ptr<const PricedModel> call_model;
  if (j.contains("call_model")) call_model = model_from_json(j["call_model"]);
  auto model = std::make_shared<PricedModel>(
      make_priced_model(arch, payoff, market, std::move(net), j.at("horizon").get<double>(), call_model));
  if (model->baseline().id() != j.value("baseline", std::string())) {
    throw std::invalid_argument("baseline '" + j.value("baseline", std::string()) + "' cannot be rebuilt");
  }
  return model;
}

}  // namespace

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string checkpoint_to_string(const PricedModel& model, const CheckpointMeta& meta,
                                 const TrainingProgress* progress) {
  json j = model_to_json(model);
  j["format_version"] = kCheckpointFormatVersion;
  j["config_digest"] = meta.config_digest;
  j["seed_data"] = meta.seed_data;
  j["seed_init"] = meta.seed_init;
  if (progress != nullptr) {
    const AdamState& adam = progress->adam;
    j["training"] = {{"epoch", progress->epoch},
                     {"adam",
                      {{"learning_rate", adam.config.learning_rate},
                       {"beta1", adam.config.beta1},
                       {"beta2", adam.config.beta2},
                       {"epsilon", adam.config.epsilon},
                       {"step", adam.step},
                       {"first_moment", vector_to_json(adam.first_moment)},
                       {"second_moment", vector_to_json(adam.second_moment)}}}};
  }
  return j.dump(1);
}

Checkpoint checkpoint_from_string(std::string_view text) {
  const json j = json::parse(text);
  const int version = j.at("format_version").get<int>();
  if (version != kCheckpointFormatVersion) {
    throw std::invalid_argument("unsupported checkpoint format_version " + std::to_string(version));
  }
  Checkpoint out;
  out.model = model_from_json(j);
  out.meta.config_digest = j.value("config_digest", std::string());
  out.meta.seed_data = j.value("seed_data", std::uint64_t{0});
  out.meta.seed_init = j.value("seed_init", std::uint64_t{0});
  if (j.contains("training")) {
    const json& t = j["training"];
    const json& a = t.at("adam");
    TrainingProgress progress;
    progress.epoch = t.at("epoch").get<long>();
    progress.adam.config = {a.at("learning_rate").get<double>(), a.at("beta1").get<double>(),
                            a.at("beta2").get<double>(), a.at("epsilon").get<double>()};
    progress.adam.step = a.at("step").get<long>();
    progress.adam.first_moment = vector_from_json(a.at("first_moment"));
    progress.adam.second_moment = vector_from_json(a.at("second_moment"));
    if (progress.adam.first_moment.size() != out.model->network().theta.size() ||
        progress.adam.second_moment.size() != out.model->network().theta.size()) {
      throw std::invalid_argument("optimizer state length differs from theta");
    }
    out.progress = std::move(progress);
  }
  return out;
}

void save_checkpoint(const std::filesystem::path& file, const PricedModel& model, const CheckpointMeta& meta,
                     const TrainingProgress* progress) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write checkpoint " + file.string());
  out << checkpoint_to_string(model, meta, progress) << '\n';
}

Checkpoint load_checkpoint(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("checkpoint " + file.string() + " not found");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return checkpoint_from_string(buffer.str());
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint " + file.string() + " is malformed: " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("checkpoint " + file.string() + ": " + e.what());
  }
}

}  // namespace dh
