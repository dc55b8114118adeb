#include "powerprint/model_io.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include "powerprint/textio.hpp"

namespace powerprint {

namespace {

constexpr const char* kMagic = "POWERPRINT-MODEL v1";

class LineReader {
 public:
  LineReader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

  std::string next() {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      strip_cr(line);
      if (!line.empty()) return line;
    }
    throw std::runtime_error(file_ + ": truncated model file (line " +
                             std::to_string(lineno_) + ")");
  }

  std::vector<std::string_view> next_fields(std::string& storage) {
    storage = next();
    return split_fields(storage, ' ');
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error(file_ + " line " + std::to_string(lineno_) + ": " + what);
  }

  long long to_long(std::string_view text) const {
    long long v = 0;
    if (!parse_long(text, v)) fail("not an integer: '" + std::string(text) + "'");
    return v;
  }

  std::uint64_t to_u64(std::string_view text) const {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) {
      fail("not an unsigned integer: '" + std::string(text) + "'");
    }
    return v;
  }

  double to_double(std::string_view text) const {
    double v = 0.0;
    if (!parse_double(text, v)) fail("not a number: '" + std::string(text) + "'");
    return v;
  }

  std::vector<double> to_doubles(const std::vector<std::string_view>& f,
                                 std::size_t from, std::size_t count) const {
    if (f.size() != from + count) {
      fail("expected " + std::to_string(count) + " values, got " +
           std::to_string(f.size() - from));
    }
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) out[i] = to_double(f[from + i]);
    return out;
  }

  long long count_after(const std::vector<std::string_view>& f, const char* tag,
                        std::size_t idx) const {
    if (f.empty() || f[0] != tag) fail(std::string("expected '") + tag + "' section");
    if (f.size() <= idx) fail(std::string("missing count after '") + tag + "'");
    const long long v = to_long(f[idx]);
    if (v < 0) fail(std::string("negative count in '") + tag + "' section");
    return v;
  }

 private:
  std::istream& in_;
  std::string file_;
  std::size_t lineno_ = 0;
};

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out << ' ';
    out << format_double(v[i]);
  }
  out << '\n';
}

}  // namespace

void save_model(const ApplianceModel& model, const std::filesystem::path& path) {
  const bool is_bsif = model.descriptor.kind == DescriptorKind::Bsif;
  if (is_bsif != model.bsif_bank.has_value()) {
    throw std::invalid_argument("model must carry a filter bank exactly when "
                                "its descriptor is bsif");
  }
  const IknnModel& knn = model.knn;
  if (knn.train.size() == 0 || knn.centroids.empty()) {
    throw std::invalid_argument("refusing to save an unfitted model");
  }

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");

  out << kMagic << '\n';
  out << "descriptor " << kind_name(model.descriptor.kind) << ' '
      << format_double(model.descriptor.ltep_threshold) << ' '
      << model.descriptor.bsif_seed << '\n';

  const std::size_t c = knn.train.class_names.size();
  out << "classes " << c << '\n';
  for (const auto& name : knn.train.class_names) out << name << '\n';
  out << "priors " << c << '\n';
  write_doubles(out, knn.class_priors);
  out << "entropy " << format_double(knn.entropy) << '\n';
  out << "weights " << c << '\n';
  write_doubles(out, knn.class_weights);
  out << "config " << knn.config.k << ' ' << knn.config.m << ' ' << knn.config.seed
      << '\n';

  const std::size_t n = knn.train.size();
  const std::size_t dim = knn.train.histograms.front().size();
  out << "train " << n << ' ' << dim << '\n';
  for (std::size_t i = 0; i < n; ++i) {
    out << knn.train.labels[i];
    for (double b : knn.train.histograms[i]) out << ' ' << format_double(b);
    out << '\n';
  }

  out << "subgroups " << knn.subgroups.size() << '\n';
  for (const auto& members : knn.subgroups) {
    out << members.size();
    for (int id : members) out << ' ' << id;
    out << '\n';
  }
  out << "centroids " << knn.centroids.size() << ' ' << dim << '\n';
  for (const auto& cen : knn.centroids) write_doubles(out, cen);

  if (is_bsif) {
    out << "bsif-bank " << model.bsif_bank->seed << '\n';
    for (const auto& f : model.bsif_bank->filters) {
      write_doubles(out, std::vector<double>(f.begin(), f.end()));
    }
  }
  out << "END\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

ApplianceModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  LineReader r(in, path.string());

  if (r.next() != kMagic) {
    throw std::runtime_error(path.string() + ": not a powerprint model file");
  }

  ApplianceModel model;
  std::string line;
  auto f = r.next_fields(line);
  if (f.size() != 4 || f[0] != "descriptor") r.fail("expected descriptor line");
  model.descriptor.kind = parse_kind(std::string(f[1]));
  model.descriptor.ltep_threshold = r.to_double(f[2]);
  model.descriptor.bsif_seed = r.to_u64(f[3]);

  IknnModel& knn = model.knn;
  f = r.next_fields(line);
  const long long c = r.count_after(f, "classes", 1);
  if (c < 2) r.fail("model needs at least 2 classes");
  for (long long i = 0; i < c; ++i) knn.train.class_names.push_back(r.next());

  f = r.next_fields(line);
  if (r.count_after(f, "priors", 1) != c) r.fail("priors count mismatch");
  f = r.next_fields(line);
  knn.class_priors = r.to_doubles(f, 0, static_cast<std::size_t>(c));

  f = r.next_fields(line);
  if (f.size() != 2 || f[0] != "entropy") r.fail("expected entropy line");
  knn.entropy = r.to_double(f[1]);

  f = r.next_fields(line);
  if (r.count_after(f, "weights", 1) != c) r.fail("weights count mismatch");
  f = r.next_fields(line);
  knn.class_weights = r.to_doubles(f, 0, static_cast<std::size_t>(c));

  f = r.next_fields(line);
  if (f.size() != 4 || f[0] != "config") r.fail("expected config line");
  knn.config.k = static_cast<int>(r.to_long(f[1]));
  knn.config.m = static_cast<int>(r.to_long(f[2]));
  knn.config.seed = r.to_u64(f[3]);

  f = r.next_fields(line);
  const long long n = r.count_after(f, "train", 1);
  const long long dim = r.count_after(f, "train", 2);
  if (n < 1 || dim < 1) r.fail("empty training block");
  knn.train.histograms.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    f = r.next_fields(line);
    if (f.empty()) r.fail("empty training row");
    const long long lab = r.to_long(f[0]);
    if (lab < 0 || lab >= c) r.fail("training label out of range");
    knn.train.labels.push_back(static_cast<int>(lab));
    knn.train.histograms.push_back(r.to_doubles(f, 1, static_cast<std::size_t>(dim)));
  }

  f = r.next_fields(line);
  const long long m = r.count_after(f, "subgroups", 1);
  if (m < 1) r.fail("model needs at least one subgroup");
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (long long g = 0; g < m; ++g) {
    f = r.next_fields(line);
    if (f.empty()) r.fail("empty subgroup row");
    const long long sz = r.to_long(f[0]);
    if (sz < 0 || f.size() != static_cast<std::size_t>(sz) + 1) {
      r.fail("subgroup member count mismatch");
    }
    std::vector<int> members(static_cast<std::size_t>(sz));
    for (long long i = 0; i < sz; ++i) {
      const long long id = r.to_long(f[static_cast<std::size_t>(i) + 1]);
      if (id < 0 || id >= n) r.fail("subgroup member out of range");
      if (seen[static_cast<std::size_t>(id)]) r.fail("training index in two subgroups");
      seen[static_cast<std::size_t>(id)] = 1;
      members[static_cast<std::size_t>(i)] = static_cast<int>(id);
    }
    knn.subgroups.push_back(std::move(members));
  }
  for (long long i = 0; i < n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      r.fail("training index missing from subgroups");
    }
  }

  f = r.next_fields(line);
  if (r.count_after(f, "centroids", 1) != m) r.fail("centroid count mismatch");
  if (r.count_after(f, "centroids", 2) != dim) r.fail("centroid length mismatch");
  for (long long g = 0; g < m; ++g) {
    f = r.next_fields(line);
    knn.centroids.push_back(r.to_doubles(f, 0, static_cast<std::size_t>(dim)));
  }

  f = r.next_fields(line);
  if (model.descriptor.kind == DescriptorKind::Bsif) {
    if (f.size() != 2 || f[0] != "bsif-bank") r.fail("expected bsif-bank section");
    BsifBank bank;
    bank.seed = r.to_u64(f[1]);
    for (auto& filt : bank.filters) {
      f = r.next_fields(line);
      const std::vector<double> row = r.to_doubles(f, 0, 9);
      std::copy(row.begin(), row.end(), filt.begin());
    }
    model.bsif_bank = bank;
    f = r.next_fields(line);
  }
  if (f.size() != 1 || f[0] != "END") r.fail("missing END marker");
  return model;
}

}  // namespace powerprint
