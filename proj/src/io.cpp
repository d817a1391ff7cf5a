#include "oukit/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace oukit::io {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; this build targets a little-endian host");

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path.string());
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used == 0) throw IoError("");
    return value;
  } catch (const std::exception&) {
    throw IoError("bad numeric field '" + token + "' in " + path.string());
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

std::string fnv1a64_hex(std::string_view bytes) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buffer;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory) {
  trajectory.validate();
  std::ostringstream out;
  out << "t,x\n";
  for (Eigen::Index i = 0; i < trajectory.x.size(); ++i) {
    out << format_double(static_cast<double>(i) * trajectory.grid.dt) << ','
        << format_double(trajectory.x[i]) << '\n';
  }
  write_file(path, out.str());
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "t,x") {
    throw IoError("missing 't,x' header in " + path.string());
  }
  std::vector<double> t, x;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw IoError("malformed row in " + path.string());
    t.push_back(parse_double(line.substr(0, comma), path));
    x.push_back(parse_double(line.substr(comma + 1), path));
  }
  if (t.size() < 2) throw IoError("trajectory in " + path.string() + " has fewer than 2 rows");

  Trajectory out;
  out.grid.dt = t[1] - t[0];
  out.grid.n_steps = static_cast<int>(t.size()) - 1;
  out.x = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (!(out.grid.dt > 0.0)) throw IoError("non-increasing time column in " + path.string());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double expected = static_cast<double>(i) * out.grid.dt;
    if (std::abs(t[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      throw IoError("non-uniform time grid in " + path.string());
    }
  }
  out.validate();
  return out;
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::uniform_k_sigma: return "uniform_k_sigma";
    case InitMode::fixed: return "fixed";
    case InitMode::stationary: return "stationary";
  }
  return "uniform_k_sigma";
}

InitMode init_mode_from_string(const std::string& name) {
  if (name == "uniform_k_sigma") return InitMode::uniform_k_sigma;
  if (name == "fixed") return InitMode::fixed;
  if (name == "stationary") return InitMode::stationary;
  throw IoError("unknown init mode '" + name + "'");
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  json combos = json::array();
  for (const auto& combo : manifest.combos) {
    combos.push_back({{"theta", combo.params.theta},
                      {"sigma_sq", combo.params.sigma_sq},
                      {"count", combo.count}});
  }
  json files = json::array();
  for (const auto& file : manifest.files) {
    files.push_back({{"file", file.file},
                     {"theta", file.params.theta},
                     {"sigma_sq", file.params.sigma_sq},
                     {"checksum", file.checksum}});
  }
  const json doc = {{"master_seed", manifest.master_seed},
                    {"grid", {{"dt", manifest.grid.dt}, {"n_steps", manifest.grid.n_steps}}},
                    {"init_mode", to_string(manifest.init_mode)},
                    {"k", manifest.k},
                    {"combos", combos},
                    {"files", files}};
  write_file(path, doc.dump(2) + "\n");
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IoError("cannot parse manifest " + path.string() + ": " + e.what());
  }
  try {
    DatasetManifest manifest;
    manifest.master_seed = doc.at("master_seed").get<std::uint64_t>();
    manifest.grid.dt = doc.at("grid").at("dt").get<double>();
    manifest.grid.n_steps = doc.at("grid").at("n_steps").get<int>();
    manifest.init_mode = init_mode_from_string(doc.at("init_mode").get<std::string>());
    manifest.k = doc.at("k").get<double>();
    for (const auto& combo : doc.at("combos")) {
      manifest.combos.push_back({OUParams{combo.at("theta").get<double>(),
                                          combo.at("sigma_sq").get<double>()},
                                 combo.at("count").get<int>()});
    }
    for (const auto& file : doc.at("files")) {
      manifest.files.push_back({file.at("file").get<std::string>(),
                                OUParams{file.at("theta").get<double>(),
                                         file.at("sigma_sq").get<double>()},
                                file.at("checksum").get<std::string>()});
    }
    return manifest;
  } catch (const json::exception& e) {
    throw IoError("manifest " + path.string() + " is missing fields: " + e.what());
  }
}

namespace {

constexpr char kModelMagic[8] = {'O', 'U', 'K', 'L', 'S', 'T', 'M', '1'};
constexpr std::uint32_t kModelVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

void put_f64(std::string& out, double v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof v);
}

// Row-major tensor record: rank, dims, data.
void put_matrix(std::string& out, const Eigen::MatrixXd& m) {
  put_u32(out, 2);
  put_u32(out, static_cast<std::uint32_t>(m.rows()));
  put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) put_f64(out, m(r, c));
  }
}

void put_vector(std::string& out, const Eigen::VectorXd& v) {
  put_u32(out, 1);
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

class Reader {
 public:
  Reader(std::string bytes, const std::filesystem::path& path)
      : bytes_(std::move(bytes)), path_(path) {}

  std::uint32_t u32() { return take<std::uint32_t>(); }
  double f64() { return take<double>(); }

  Eigen::MatrixXd matrix(Eigen::Index rows, Eigen::Index cols) {
    expect_header(2, {rows, cols});
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = f64();
    }
    return m;
  }

  Eigen::VectorXd vector(Eigen::Index size) {
    expect_header(1, {size});
    Eigen::VectorXd v(size);
    for (Eigen::Index i = 0; i < size; ++i) v[i] = f64();
    return v;
  }

  void raw(char* dst, std::size_t n) {
    if (at_ + n > bytes_.size()) throw IoError("truncated model file " + path_.string());
    std::memcpy(dst, bytes_.data() + at_, n);
    at_ += n;
  }

  bool exhausted() const { return at_ == bytes_.size(); }

 private:
  template <class T>
  T take() {
    T v;
    raw(reinterpret_cast<char*>(&v), sizeof v);
    return v;
  }

  void expect_header(std::uint32_t rank, std::initializer_list<Eigen::Index> dims) {
    if (u32() != rank) throw IoError("unexpected tensor rank in " + path_.string());
    for (const Eigen::Index d : dims) {
      if (u32() != static_cast<std::uint32_t>(d)) {
        throw IoError("tensor dimensions in " + path_.string() +
                      " do not match the declared architecture");
      }
    }
  }

  std::string bytes_;
  std::size_t at_ = 0;
  const std::filesystem::path& path_;
};

}  // namespace

void save_model(const std::filesystem::path& path, const LstmModel& model) {
  model.validate();
  std::string out;
  out.append(kModelMagic, sizeof kModelMagic);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(model.hidden_size()));
  put_u32(out, static_cast<std::uint32_t>(model.n_layers()));
  put_f64(out, model.elu_alpha);
  put_f64(out, model.normalizer.shift);
  put_f64(out, model.normalizer.scale);
  put_u32(out, static_cast<std::uint32_t>(4 * model.n_layers() + 2));
  for (const auto& layer : model.layers) {
    put_matrix(out, layer.w_ih);
    put_matrix(out, layer.w_hh);
    put_vector(out, layer.b_ih);
    put_vector(out, layer.b_hh);
  }
  put_matrix(out, model.w_out);
  put_vector(out, model.b_out);
  write_file(path, out);
}

LstmModel load_model(const std::filesystem::path& path) {
  Reader reader(read_file(path), path);
  char magic[8];
  reader.raw(magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) {
    throw IoError(path.string() + " is not a model file (bad magic)");
  }
  if (reader.u32() != kModelVersion) {
    throw IoError(path.string() + " has an unsupported format version");
  }
  const Eigen::Index hidden = reader.u32();
  const Eigen::Index n_layers = reader.u32();
  if (hidden < 1 || n_layers < 1) throw IoError(path.string() + " declares an empty model");

  LstmModel model;
  model.elu_alpha = reader.f64();
  model.normalizer.shift = reader.f64();
  model.normalizer.scale = reader.f64();
  const std::uint32_t n_tensors = reader.u32();
  if (n_tensors != static_cast<std::uint32_t>(4 * n_layers + 2)) {
    throw IoError(path.string() + " tensor count does not match the layer count");
  }

  Eigen::Index input = 1;
  model.layers.resize(n_layers);
  for (auto& layer : model.layers) {
    layer.w_ih = reader.matrix(4 * hidden, input);
    layer.w_hh = reader.matrix(4 * hidden, hidden);
    layer.b_ih = reader.vector(4 * hidden);
    layer.b_hh = reader.vector(4 * hidden);
    input = hidden;
  }
  model.w_out = reader.matrix(2, hidden);
  model.b_out = reader.vector(2);
  if (!reader.exhausted()) throw IoError(path.string() + " has trailing bytes");
  model.validate();
  return model;
}

void write_loss_curve_csv(const std::filesystem::path& path,
                          const std::vector<EpochStats>& curve) {
  std::ostringstream out;
  out << "epoch,train_loss,val_loss\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << format_double(curve[i].train_loss) << ','
        << format_double(curve[i].val_loss) << '\n';
  }
  write_file(path, out.str());
}

namespace {

std::string fixed4(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.4f", v);
  return buffer;
}

void append_stat_cells(std::ostringstream& out, const EstimatorReport& report) {
  const StatSummary* blocks[2] = {&report.stats.theta, &report.stats.sigma_sq};
  for (const auto* block : blocks) {
    out << " " << fixed4(block->mean) << " | " << fixed4(block->median) << " | "
        << fixed4(block->std_dev) << " | " << fixed4(block->rmse) << " |";
  }
  out << " " << report.n_succeeded << "/" << (report.n_succeeded + report.n_failed) << " |";
}

json stat_json(const StatSummary& s) {
  return {{"mean", s.mean}, {"median", s.median}, {"std", s.std_dev}, {"rmse", s.rmse}};
}

json estimator_json(const EstimatorReport& report) {
  return {{"theta", stat_json(report.stats.theta)},
          {"sigma_sq", stat_json(report.stats.sigma_sq)},
          {"n_succeeded", report.n_succeeded},
          {"n_failed", report.n_failed}};
}

}  // namespace

void write_report_markdown(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ostringstream out;
  out << "# Estimation statistics across parameter regimes\n\n";
  out << "| Regime | True th | True s2 | Estimator |"
         " th mean | th median | th std | th RMSE |"
         " s2 mean | s2 median | s2 std | s2 RMSE | ok |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|---|---|\n";
  for (const auto& row : report.regimes) {
    const auto emit = [&](const char* name, const EstimatorReport& est) {
      out << "| " << row.regime.name << " | " << fixed4(row.regime.params.theta) << " | "
          << fixed4(row.regime.params.sigma_sq) << " | " << name << " |";
      append_stat_cells(out, est);
      out << "\n";
    };
    if (row.mle) emit("MLE", *row.mle);
    if (row.rnn) emit("RNN", *row.rnn);
  }
  write_file(path, out.str());
}

void write_report_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ostringstream out;
  out << "regime,theta_true,sigma_sq_true,estimator,parameter,mean,median,std,rmse,"
         "n_succeeded,n_failed\n";
  for (const auto& row : report.regimes) {
    const auto emit = [&](const char* name, const EstimatorReport& est) {
      const struct {
        const char* parameter;
        const StatSummary& stats;
      } blocks[2] = {{"theta", est.stats.theta}, {"sigma_sq", est.stats.sigma_sq}};
      for (const auto& block : blocks) {
        out << row.regime.name << ',' << format_double(row.regime.params.theta) << ','
            << format_double(row.regime.params.sigma_sq) << ',' << name << ','
            << block.parameter << ',' << format_double(block.stats.mean) << ','
            << format_double(block.stats.median) << ',' << format_double(block.stats.std_dev)
            << ',' << format_double(block.stats.rmse) << ',' << est.n_succeeded << ','
            << est.n_failed << '\n';
      }
    };
    if (row.mle) emit("mle", *row.mle);
    if (row.rnn) emit("rnn", *row.rnn);
  }
  write_file(path, out.str());
}

void write_report_json(const std::filesystem::path& path, const BenchmarkReport& report) {
  json regimes = json::array();
  for (const auto& row : report.regimes) {
    json entry = {{"regime", row.regime.name},
                  {"theta_true", row.regime.params.theta},
                  {"sigma_sq_true", row.regime.params.sigma_sq},
                  {"stationary_variance", row.regime.stationary_variance},
                  {"n_paths", row.n_paths}};
    if (row.mle) entry["mle"] = estimator_json(*row.mle);
    if (row.rnn) entry["rnn"] = estimator_json(*row.rnn);
    regimes.push_back(std::move(entry));
  }
  write_file(path, json{{"regimes", regimes}}.dump(2) + "\n");
}

void write_estimates_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ostringstream out;
  out << "regime,path_idx,estimator,theta_hat,sigma_sq_hat,wall_time_s,converged\n";
  for (const auto& row : report.estimates) {
    out << row.regime << ',' << row.path_idx << ',' << row.estimator << ','
        << format_double(row.theta_hat) << ',' << format_double(row.sigma_sq_hat) << ','
        << format_double(row.wall_time_s) << ',' << (row.converged ? 1 : 0) << '\n';
  }
  write_file(path, out.str());
}

void write_timing_json(const std::filesystem::path& path, const BenchmarkReport& report) {
  json per_regime = json::array();
  double mle_total = 0.0, rnn_total = 0.0;
  for (const auto& row : report.regimes) {
    json entry = {{"regime", row.regime.name}};
    if (row.mle) {
      entry["mle_wall_time_s"] = row.mle->wall_time_total_s;
      mle_total += row.mle->wall_time_total_s;
    }
    if (row.rnn) {
      entry["rnn_wall_time_s"] = row.rnn->wall_time_total_s;
      rnn_total += row.rnn->wall_time_total_s;
    }
    per_regime.push_back(std::move(entry));
  }
  const json doc = {{"mle_wall_time_total_s", mle_total},
                    {"rnn_wall_time_total_s", rnn_total},
                    {"per_regime", per_regime}};
  write_file(path, doc.dump(2) + "\n");
}

std::vector<PathEstimate> read_estimates_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) ||
      line != "regime,path_idx,estimator,theta_hat,sigma_sq_hat,wall_time_s,converged") {
    throw IoError("unexpected estimates header in " + path.string());
  }
  std::vector<PathEstimate> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string token;
    PathEstimate row;
    std::getline(fields, row.regime, ',');
    std::getline(fields, token, ',');
    row.path_idx = static_cast<int>(parse_double(token, path));
    std::getline(fields, row.estimator, ',');
    std::getline(fields, token, ',');
    row.theta_hat = parse_double(token, path);
    std::getline(fields, token, ',');
    row.sigma_sq_hat = parse_double(token, path);
    std::getline(fields, token, ',');
    row.wall_time_s = parse_double(token, path);
    std::getline(fields, token, ',');
    row.converged = token == "1";
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace oukit::io
