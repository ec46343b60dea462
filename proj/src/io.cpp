#include "qrc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qrc/error.hpp"

namespace qrc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  return out;
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

fs::path sidecar(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

json phases_json(const Phases& p) { return {{"washout", p.washout}, {"train", p.train}, {"eval", p.eval}}; }

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

void write_signals(const fs::path& csv_path, const SignalMatrix& s) {
  auto out = open_out(csv_path);
  const auto names = s.column_names();
  for (std::size_t i = 0; i < names.size(); ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (Eigen::Index r = 0; r < s.rows(); ++r) {
    for (Eigen::Index c = 0; c < s.cols(); ++c) out << (c ? "," : "") << format_double(s.data(r, c));
    out << '\n';
  }
  auto meta = open_out(sidecar(csv_path));
  meta << json{{"rows", s.rows()},
               {"cols", s.cols()},
               {"n_nodes", s.n_nodes},
               {"virtual_nodes", s.virtual_nodes},
               {"phases", phases_json(s.phases)}}
              .dump(2)
       << '\n';
}

SignalMatrix read_signals(const fs::path& csv_path) {
  const json meta = read_json(sidecar(csv_path));
  SignalMatrix s;
  s.n_nodes = meta.at("n_nodes").get<int>();
  s.virtual_nodes = meta.at("virtual_nodes").get<int>();
  s.phases = {meta.at("phases").at("washout").get<std::size_t>(), meta.at("phases").at("train").get<std::size_t>(),
              meta.at("phases").at("eval").get<std::size_t>()};
  const auto rows = meta.at("rows").get<Eigen::Index>();
  const auto cols = meta.at("cols").get<Eigen::Index>();
  s.data.resize(rows, cols);

  std::ifstream in(csv_path);
  if (!in) throw ConfigError("cannot open " + csv_path.string());
  std::string line;
  std::getline(in, line);  // header
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw ConfigError(csv_path.string() + ": expected " + std::to_string(rows) + " rows");
    std::istringstream cells(line);
    std::string cell;
    for (Eigen::Index c = 0; c < cols; ++c) {
      if (!std::getline(cells, cell, ',')) throw ConfigError(csv_path.string() + ": short row", static_cast<int>(r + 2));
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc()) throw ConfigError(csv_path.string() + ": bad number '" + cell + "'", static_cast<int>(r + 2));
      s.data(r, c) = v;
    }
  }
  return s;
}

void write_weights(const fs::path& json_path, const ReadoutWeights& w) {
  auto out = open_out(json_path);
  out << json{{"weights", std::vector<double>(w.weights.data(), w.weights.data() + w.weights.size())},
              {"training_residual", w.training_residual},
              {"rank", w.rank}}
             .dump(2)
      << '\n';
}

ReadoutWeights read_weights(const fs::path& json_path) {
  const json j = read_json(json_path);
  const auto v = j.at("weights").get<std::vector<double>>();
  ReadoutWeights w;
  w.weights = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  w.training_residual = j.at("training_residual").get<double>();
  w.rank = j.at("rank").get<int>();
  return w;
}

void write_eval_report_json(const fs::path& path, const EvalReport& r) {
  json j{{"nmse", r.nmse}, {"outputs", r.outputs}, {"targets", r.targets}};
  j["capacity"] = std::isnan(r.capacity_value) ? json(nullptr) : json(r.capacity_value);
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

void write_eval_report_csv(const fs::path& path, const EvalReport& r) {
  auto out = open_out(path);
  out << "k,output,target\n";
  for (std::size_t k = 0; k < r.outputs.size(); ++k)
    out << k << ',' << format_double(r.outputs[k]) << ',' << format_double(r.targets[k]) << '\n';
}

void write_task_stream(const fs::path& csv_path, const TaskStream& t) {
  auto out = open_out(csv_path);
  out << "k,s";
  for (const auto& n : t.target_names) out << ',' << n;
  out << '\n';
  for (std::size_t k = 0; k < t.inputs.size(); ++k) {
    out << k << ',' << format_double(t.inputs[k]);
    for (const auto& y : t.targets) out << ',' << format_double(y[k]);
    out << '\n';
  }
  json meta{{"name", t.name}, {"length", t.inputs.size()}, {"targets", t.target_names}, {"phases", phases_json(t.phases)}};
  for (const auto& [k, v] : t.metadata) meta["parameters"][k] = v;
  auto m = open_out(sidecar(csv_path));
  m << meta.dump(2) << '\n';
}

std::string config_summary_json(const ReservoirConfig& c) {
  json j{{"n_qubits", c.n_qubits},
         {"tau", c.tau},
         {"virtual_nodes", c.virtual_nodes},
         {"coupling", c.coupling},
         {"field", c.field},
         {"topology", std::string(to_string(c.topology))},
         {"dephasing_rate", c.noise.dephasing_rate},
         {"dephasing_axis", std::string(to_string(c.noise.dephasing_axis))},
         {"observation_sigma", c.noise.observation_sigma},
         {"phases", phases_json(c.phases)},
         {"seed", c.seed}};
  if (c.noise.dephasing_dt) j["dephasing_dt"] = *c.noise.dephasing_dt;
  return j.dump(2);
}

}  // namespace qrc
