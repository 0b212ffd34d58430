#include "hazardsim/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "hazardsim/error.hpp"

namespace hazardsim {

static_assert(std::endian::native == std::endian::little, "model.bin writer assumes a little-endian host");

namespace {

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary), path_(path) {
    if (!out_) throw IoError("cannot write " + path.string());
  }
  void raw(const void* data, std::size_t n) { out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n)); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void strings(const std::vector<std::string>& v) {
    u64(v.size());
    for (const auto& s : v) str(s);
  }
  void reals(const std::vector<double>& v) {
    u64(v.size());
    raw(v.data(), v.size() * sizeof(double));
  }
  void matrix(const Eigen::MatrixXd& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
  }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed: " + path_.string());
  }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open " + path.string());
  }
  void raw(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ValidationError("model file is truncated");
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v = 0;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t count() {
    const std::uint64_t n = u64();
    if (n > (std::uint64_t{1} << 40)) throw ValidationError("model file is corrupt (implausible length)");
    return n;
  }
  std::string str() {
    std::string s(count(), '\0');
    raw(s.data(), s.size());
    return s;
  }
  std::vector<std::string> strings() {
    std::vector<std::string> v(count());
    for (auto& s : v) s = str();
    return v;
  }
  std::vector<double> reals() {
    std::vector<double> v(count());
    raw(v.data(), v.size() * sizeof(double));
    return v;
  }
  Eigen::MatrixXd matrix() {
    const auto rows = static_cast<Eigen::Index>(count());
    const auto cols = static_cast<Eigen::Index>(count());
    Eigen::MatrixXd m(rows, cols);
    raw(m.data(), static_cast<std::size_t>(m.size()) * sizeof(double));
    return m;
  }

 private:
  std::ifstream in_;
};

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_model(const std::filesystem::path& path, const StoredModel& stored) {
  const gam::GamModel& m = stored.model;
  BinaryWriter w(path);
  w.raw(kModelMagic, 7);
  w.u32(kModelFormatVersion);

  w.strings(m.spec.fixed);
  w.f64(m.spec.fixed_precision);
  w.f64(m.spec.intercept_precision);
  w.reals(m.spec.log_precision_grid);
  w.u64(m.spec.smooths.size());
  for (const auto& s : m.spec.smooths) {
    w.str(s.covariate);
    w.reals(s.breaks);
  }

  w.strings(m.scaler.columns);
  w.reals(m.scaler.means);
  w.reals(m.scaler.sds);
  w.u64(m.n_training);

  const gam::GamPosterior& p = m.posterior;
  w.reals(std::vector<double>(p.mode.data(), p.mode.data() + p.mode.size()));
  w.matrix(p.basis);
  w.matrix(p.factor);
  w.reals(p.smooth_log_precisions);
  w.u64(p.grid_points.size());
  for (const auto& g : p.grid_points) w.reals(g);
  w.reals(p.log_marginal);

  const SlopeUnitTable& u = stored.units;
  w.strings(u.unit_ids());
  w.u64(u.n_units());
  for (int label : u.labels()) w.u32(static_cast<std::uint32_t>(label));
  w.strings(u.column_names());
  for (const auto& name : u.column_names()) {
    auto col = u.column(name);
    w.reals(std::vector<double>(col.begin(), col.end()));
  }
  w.str(stored.trigger);
  w.finish();
}

StoredModel load_model(const std::filesystem::path& path) {
  BinaryReader r(path);
  char magic[7];
  r.raw(magic, 7);
  if (std::memcmp(magic, kModelMagic, 7) != 0) throw ValidationError(path.string() + " is not a model file");
  const std::uint32_t version = r.u32();
  if (version != kModelFormatVersion) {
    throw ValidationError("unsupported model format version " + std::to_string(version));
  }

  gam::GamModel m;
  m.spec.fixed = r.strings();
  m.spec.fixed_precision = r.f64();
  m.spec.intercept_precision = r.f64();
  m.spec.log_precision_grid = r.reals();
  const std::uint64_t n_smooths = r.count();
  for (std::uint64_t s = 0; s < n_smooths; ++s) {
    BinDefinition b;
    b.covariate = r.str();
    b.breaks = r.reals();
    m.spec.smooths.push_back(std::move(b));
  }
  m.spec.validate();

  m.scaler.columns = r.strings();
  m.scaler.means = r.reals();
  m.scaler.sds = r.reals();
  m.n_training = r.u64();

  gam::GamPosterior& p = m.posterior;
  p.mode = to_vector(r.reals());
  p.basis = r.matrix();
  p.factor = r.matrix();
  p.smooth_log_precisions = r.reals();
  p.grid_points.resize(r.count());
  for (auto& g : p.grid_points) g = r.reals();
  p.log_marginal = r.reals();
  const auto dim = static_cast<Eigen::Index>(m.spec.n_coefficients());
  if (p.mode.size() != dim || p.basis.rows() != dim || p.basis.cols() != p.factor.rows() ||
      p.factor.rows() != p.factor.cols()) {
    throw ValidationError("model file is inconsistent: coefficient dimensions do not match the spec");
  }
  p.covariance = p.basis * p.factor * p.factor.transpose() * p.basis.transpose();
  p.covariance = 0.5 * (p.covariance + p.covariance.transpose()).eval();
  p.columns = gam::column_map(m.spec);

  auto ids = r.strings();
  std::vector<int> labels(r.count());
  for (auto& l : labels) l = static_cast<int>(r.u32());
  auto names = r.strings();
  std::vector<std::vector<double>> columns;
  for (std::size_t c = 0; c < names.size(); ++c) columns.push_back(r.reals());
  StoredModel stored{std::move(m),
                     SlopeUnitTable::create(std::move(ids), std::move(labels), std::move(names), std::move(columns)),
                     r.str()};
  return stored;
}

}  // namespace hazardsim
