#include "ride/sensing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ride/errors.hpp"
#include "ride/model_io.hpp"

namespace ride {
namespace {

constexpr double kOrthonormalTolerance = 1e-10;

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

bool check_row_orthonormal(const RowMatrix& a) {
  const Eigen::MatrixXd gram = a * a.transpose();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
  return (gram - eye).cwiseAbs().maxCoeff() < kOrthonormalTolerance;
}

void require_length(std::span<const double> v, int expected, const char* what) {
  if (static_cast<int>(v.size()) != expected) {
    throw std::invalid_argument(std::string(what) + ": length " + std::to_string(v.size()) + " != " +
                                std::to_string(expected));
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// "<MAGIC> <version>\n" then "key value\n" lines, closed by
// "payload <type> <count>\n" and the raw payload bytes.
struct TextHeader {
  std::map<std::string, std::string> fields;
  std::string payload_type;
  std::size_t payload_count = 0;
  std::size_t payload_offset = 0;
};

std::vector<std::uint8_t> header_bytes(std::string_view magic, const std::vector<std::pair<std::string, std::string>>& fields,
                                       std::string_view payload_type, std::size_t payload_count) {
  std::ostringstream os;
  os << magic << " 1\n";
  for (const auto& [k, v] : fields) os << k << ' ' << v << '\n';
  os << "payload " << payload_type << ' ' << payload_count << '\n';
  const std::string s = os.str();
  return {s.begin(), s.end()};
}

TextHeader parse_header(std::span<const std::uint8_t> bytes, std::string_view magic) {
  TextHeader h;
  std::size_t pos = 0;
  auto next_line = [&]() -> std::string {
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    if (pos >= bytes.size()) throw FormatError("header truncated at byte offset " + std::to_string(start));
    std::string line(bytes.begin() + static_cast<std::ptrdiff_t>(start), bytes.begin() + static_cast<std::ptrdiff_t>(pos));
    ++pos;
    return line;
  };
  std::istringstream first(next_line());
  std::string got_magic;
  int version = 0;
  first >> got_magic >> version;
  if (got_magic != magic) throw FormatError("expected " + std::string(magic) + " header, found '" + got_magic + "'");
  if (version != 1) throw VersionError("unsupported " + std::string(magic) + " version " + std::to_string(version));
  for (;;) {
    std::istringstream ls(next_line());
    std::string key;
    ls >> key;
    if (key == "payload") {
      ls >> h.payload_type >> h.payload_count;
      if (!ls) throw FormatError("malformed payload line");
      break;
    }
    std::string value;
    ls >> value;
    if (key.empty() || !ls) throw FormatError("malformed header line near byte offset " + std::to_string(pos));
    h.fields[key] = value;
  }
  h.payload_offset = pos;
  return h;
}

const std::string& field(const TextHeader& h, const std::string& key) {
  auto it = h.fields.find(key);
  if (it == h.fields.end()) throw FormatError("header is missing field '" + key + "'");
  return it->second;
}

long long int_field(const TextHeader& h, const std::string& key) {
  try {
    return std::stoll(field(h, key));
  } catch (const std::logic_error&) {
    throw FormatError("header field '" + key + "' is not an integer");
  }
}

}  // namespace

std::string_view to_string(OperatorKind kind) { return kind == OperatorKind::dense ? "gaussian" : "fwht"; }

MeasurementOperator MeasurementOperator::dense(RowMatrix matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1) throw std::invalid_argument("dense operator: empty matrix");
  if (matrix.rows() > matrix.cols()) throw std::invalid_argument("dense operator: m > n");
  MeasurementOperator op;
  op.kind_ = OperatorKind::dense;
  op.n_ = static_cast<int>(matrix.cols());
  op.m_ = static_cast<int>(matrix.rows());
  op.row_orthonormal_ = check_row_orthonormal(matrix);
  op.matrix_ = std::move(matrix);
  return op;
}

MeasurementOperator MeasurementOperator::fwht_rows(int n, std::vector<std::uint32_t> rows, std::uint64_t seed) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fwht operator: n = " + std::to_string(n) + " is not a power of 2");
  if (rows.empty() || rows.size() > static_cast<std::size_t>(n)) {
    throw std::invalid_argument("fwht operator: need 1 <= m <= n rows");
  }
  std::vector<std::uint32_t> sorted = rows;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw std::invalid_argument("fwht operator: duplicate row index");
  }
  if (sorted.back() >= static_cast<std::uint32_t>(n)) throw std::invalid_argument("fwht operator: row index >= n");
  MeasurementOperator op;
  op.kind_ = OperatorKind::fwht;
  op.n_ = n;
  op.m_ = static_cast<int>(rows.size());
  op.row_orthonormal_ = true;  // distinct rows of an orthogonal matrix
  op.seed_ = seed;
  op.rows_ = std::move(rows);
  return op;
}

void fwht_inplace(std::span<double> data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fwht_inplace: length must be a power of 2");
  for (std::size_t len = 1; len < n; len <<= 1) {
    for (std::size_t i = 0; i < n; i += len << 1) {
      for (std::size_t j = i; j < i + len; ++j) {
        const double a = data[j];
        const double b = data[j + len];
        data[j] = a + b;
        data[j + len] = a - b;
      }
    }
  }
}

std::vector<double> MeasurementOperator::apply(std::span<const double> x) const {
  require_length(x, n_, "operator apply");
  std::vector<double> y(static_cast<std::size_t>(m_));
  if (kind_ == OperatorKind::dense) {
    VectorMap(y.data(), m_).noalias() = matrix_ * ConstVectorMap(x.data(), n_);
    return y;
  }
  std::vector<double> work(x.begin(), x.end());
  fwht_inplace(work);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  for (int k = 0; k < m_; ++k) y[static_cast<std::size_t>(k)] = work[rows_[static_cast<std::size_t>(k)]] * scale;
  return y;
}

std::vector<double> MeasurementOperator::adjoint(std::span<const double> y) const {
  require_length(y, m_, "operator adjoint");
  std::vector<double> x(static_cast<std::size_t>(n_), 0.0);
  if (kind_ == OperatorKind::dense) {
    VectorMap(x.data(), n_).noalias() = matrix_.transpose() * ConstVectorMap(y.data(), m_);
    return x;
  }
  // The normalized Hadamard matrix is symmetric: Phiᵀy = H (scatter y) / sqrt(n).
  for (int k = 0; k < m_; ++k) x[rows_[static_cast<std::size_t>(k)]] = y[static_cast<std::size_t>(k)];
  fwht_inplace(x);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
  for (auto& v : x) v *= scale;
  return x;
}

RowMatrix MeasurementOperator::to_dense() const {
  if (kind_ == OperatorKind::dense) return matrix_;
  RowMatrix a(m_, n_);
  std::vector<double> e(static_cast<std::size_t>(n_), 0.0);
  for (int c = 0; c < n_; ++c) {
    e[static_cast<std::size_t>(c)] = 1.0;
    const auto col = apply(e);
    for (int r = 0; r < m_; ++r) a(r, c) = col[static_cast<std::size_t>(r)];
    e[static_cast<std::size_t>(c)] = 0.0;
  }
  return a;
}

MeasurementOperator make_gaussian_operator(int n, int m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("gaussian operator: n and m must be >= 1");
  if (m > n) throw std::invalid_argument("gaussian operator: m = " + std::to_string(m) + " > n = " + std::to_string(n));
  SeededRng rng(seed);
  RowMatrix q(m, n);
  for (Eigen::Index k = 0; k < q.size(); ++k) q.data()[k] = rng.normal();

  Eigen::VectorXd coeffs;
  for (int k = 0; k < m; ++k) {
    auto row = q.row(k);
    for (int pass = 0; pass < 2 && k > 0; ++pass) {
      coeffs.noalias() = q.topRows(k) * row.transpose();
      row.noalias() -= coeffs.transpose() * q.topRows(k);
    }
    const double norm = row.norm();
    if (!(norm > 1e-12)) throw NumericError("gaussian operator: degenerate row during orthonormalization");
    row /= norm;
  }

  MeasurementOperator op;
  op.kind_ = OperatorKind::dense;
  op.n_ = n;
  op.m_ = m;
  op.seed_ = seed;
  op.seeded_ = true;
  op.row_orthonormal_ = true;
  op.matrix_ = std::move(q);
  return op;
}

MeasurementOperator make_fwht_operator(int n, int m, std::uint64_t seed) {
  if (!is_power_of_two(n)) throw std::invalid_argument("fwht operator: n = " + std::to_string(n) + " is not a power of 2");
  if (m < 1 || m > n) throw std::invalid_argument("fwht operator: need 1 <= m <= n");
  SeededRng rng(seed);
  std::vector<std::uint32_t> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0u);
  for (int k = 0; k < m; ++k) {
    const auto pick = static_cast<std::size_t>(k) + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(n - k)));
    std::swap(all[static_cast<std::size_t>(k)], all[pick]);
  }
  std::vector<std::uint32_t> rows(all.begin(), all.begin() + m);
  std::sort(rows.begin(), rows.end());
  MeasurementOperator op = MeasurementOperator::fwht_rows(n, std::move(rows), seed);
  op.seeded_ = true;
  return op;
}

Measurements measure(const MeasurementOperator& op, const Grid2D& image, double sigma, SeededRng& rng) {
  if (static_cast<int>(image.size()) != op.n()) {
    throw std::invalid_argument("measure: image has " + std::to_string(image.size()) + " pixels, operator expects " +
                                std::to_string(op.n()));
  }
  if (!(sigma >= 0.0)) throw std::invalid_argument("measure: sigma must be >= 0");
  Measurements y;
  y.values = op.apply(image.values());
  y.sigma = sigma;
  y.rows = image.rows();
  y.cols = image.cols();
  if (sigma > 0.0) {
    for (auto& v : y.values) v += sigma * rng.normal();
  }
  return y;
}

Grid2D project_affine(const MeasurementOperator& op, const Grid2D& x, const Measurements& y) {
  if (!op.row_orthonormal()) {
    throw std::invalid_argument("project_affine: operator rows are not orthonormal");
  }
  if (static_cast<int>(x.size()) != op.n()) throw std::invalid_argument("project_affine: image size mismatch");
  require_length(y.values, op.m(), "project_affine measurements");
  std::vector<double> residual = op.apply(x.values());
  for (std::size_t k = 0; k < residual.size(); ++k) residual[k] -= y.values[k];
  const std::vector<double> correction = op.adjoint(residual);
  Grid2D out = x;
  for (std::size_t k = 0; k < out.size(); ++k) out[k] -= correction[k];
  return out;
}

void save_operator(const MeasurementOperator& op, const std::filesystem::path& path) {
  std::vector<std::uint8_t> bytes;
  if (op.kind() == OperatorKind::dense) {
    if (!op.seeded()) {
      throw std::invalid_argument("save_operator: only seed-generated dense operators can be described");
    }
    bytes = header_bytes("RIDE-OPERATOR",
                         {{"kind", "gaussian"},
                          {"n", std::to_string(op.n())},
                          {"m", std::to_string(op.m())},
                          {"seed", std::to_string(op.seed())}},
                         "none", 0);
  } else {
    bytes = header_bytes("RIDE-OPERATOR",
                         {{"kind", "fwht"},
                          {"n", std::to_string(op.n())},
                          {"m", std::to_string(op.m())},
                          {"seed", std::to_string(op.seed())}},
                         "uint32le", op.hadamard_rows().size());
    for (std::uint32_t r : op.hadamard_rows()) {
      for (int k = 0; k < 4; ++k) bytes.push_back(static_cast<std::uint8_t>(r >> (8 * k)));
    }
  }
  write_file_atomic(path, bytes);
}

MeasurementOperator load_operator(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const TextHeader h = parse_header(bytes, "RIDE-OPERATOR");
  const std::string& kind = field(h, "kind");
  const auto n = static_cast<int>(int_field(h, "n"));
  const auto m = static_cast<int>(int_field(h, "m"));
  const auto seed = static_cast<std::uint64_t>(std::stoull(field(h, "seed")));
  if (kind == "gaussian") {
    if (h.payload_count != 0) throw FormatError("gaussian operator descriptor carries an unexpected payload");
    return make_gaussian_operator(n, m, seed);
  }
  if (kind != "fwht") throw FormatError("unknown operator kind '" + kind + "'");
  if (h.payload_type != "uint32le" || h.payload_count != static_cast<std::size_t>(m)) {
    throw FormatError("fwht descriptor payload must hold m uint32le row indices");
  }
  if (bytes.size() != h.payload_offset + 4 * h.payload_count) {
    throw FormatError("fwht descriptor payload truncated at byte offset " + std::to_string(bytes.size()));
  }
  std::vector<std::uint32_t> rows(h.payload_count);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[h.payload_offset + 4 * k + static_cast<std::size_t>(b)]) << (8 * b);
    rows[k] = v;
  }
  // The payload is authoritative; the seed is carried along for provenance.
  return MeasurementOperator::fwht_rows(n, std::move(rows), seed);
}

void save_measurements(const Measurements& y, const std::filesystem::path& path) {
  auto bytes = header_bytes("RIDE-MEASUREMENTS",
                            {{"m", std::to_string(y.values.size())},
                             {"sigma", format_double(y.sigma)},
                             {"rows", std::to_string(y.rows)},
                             {"cols", std::to_string(y.cols)}},
                            "float64le", y.values.size());
  for (double v : y.values) {
    const auto u = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) bytes.push_back(static_cast<std::uint8_t>(u >> (8 * k)));
  }
  write_file_atomic(path, bytes);
}

Measurements load_measurements(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  const TextHeader h = parse_header(bytes, "RIDE-MEASUREMENTS");
  Measurements y;
  const auto m = static_cast<std::size_t>(int_field(h, "m"));
  y.rows = static_cast<int>(int_field(h, "rows"));
  y.cols = static_cast<int>(int_field(h, "cols"));
  try {
    y.sigma = std::stod(field(h, "sigma"));
  } catch (const std::logic_error&) {
    throw FormatError("header field 'sigma' is not a number");
  }
  if (h.payload_type != "float64le" || h.payload_count != m) {
    throw FormatError("measurement payload must hold m float64le values");
  }
  if (bytes.size() != h.payload_offset + 8 * m) {
    throw FormatError("measurement payload truncated at byte offset " + std::to_string(bytes.size()));
  }
  y.values.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    std::uint64_t u = 0;
    for (int b = 0; b < 8; ++b) u |= static_cast<std::uint64_t>(bytes[h.payload_offset + 8 * k + static_cast<std::size_t>(b)]) << (8 * b);
    y.values[k] = std::bit_cast<double>(u);
  }
  return y;
}

}  // namespace ride
