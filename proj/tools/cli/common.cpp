#include "common.hpp"

#include <algorithm>
#include <cmath>

namespace cli {

std::string csv_cell(const std::string& raw) {
  if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
  std::string quoted = "\"";
  for (char c : raw) {
    if (c == '"') quoted += "\"\"";
    else quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ',';
    line += csv_cell(cells[i]);
  }
  line += '\n';
  return line;
}

CsvSink::CsvSink(const std::string& path) {
  if (path.empty()) {
    file_ = stdout;
    return;
  }
  file_ = std::fopen(path.c_str(), "wb");
  if (!file_) throw CommandError(2, "cannot open CSV output: " + path);
  owned_ = true;
}

CsvSink::~CsvSink() {
  if (owned_ && file_) std::fclose(file_);
}

void CsvSink::row(const std::vector<std::string>& cells) { raw(csv_row(cells)); }

void CsvSink::raw(const std::string& line) {
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) {
    throw CommandError(2, "CSV write failed");
  }
}

void add_data_flags(CLI::App* cmd, DataOpts& opts) {
  cmd->add_option("--data", opts.source, "Dataset source: blobs or idx")
      ->check(CLI::IsMember({"blobs", "idx"}))
      ->capture_default_str();
  cmd->add_option("--classes", opts.classes, "Blob classes")->capture_default_str();
  cmd->add_option("--dim", opts.dim, "Blob input dimension")->capture_default_str();
  cmd->add_option("--per-class", opts.per_class, "Blob samples per class (train + test)")
      ->capture_default_str();
  cmd->add_option("--spread", opts.spread, "Blob noise scale around each center")
      ->capture_default_str();
  cmd->add_option("--train-per-class", opts.train_per_class,
                  "Blob samples per class reserved for training; the rest become the test "
                  "split (0 keeps everything in train)")
      ->capture_default_str();
  auto* seed_opt =
      cmd->add_option("--data-seed", opts.data_seed, "Blob generation seed (defaults to --seed)");
  seed_opt->each([&opts](const std::string&) { opts.data_seed_set = true; });

  cmd->add_option("--images", opts.images, "IDX image file (train)");
  cmd->add_option("--labels", opts.labels, "IDX label file (train)");
  cmd->add_option("--test-images", opts.test_images, "IDX image file (test)");
  cmd->add_option("--test-labels", opts.test_labels, "IDX label file (test)");
  cmd->add_option("--limit", opts.limit, "Keep only the first N training samples");
  cmd->add_option("--test-limit", opts.test_limit, "Keep only the first N test samples");
}

DataSplit materialize(const DataOpts& opts, std::uint64_t default_seed) {
  DataSplit split;
  if (opts.source == "blobs") {
    const std::uint64_t seed = opts.data_seed_set ? opts.data_seed : default_seed;
    DatasetHandle all;
    check(feta_dataset_synth_blobs(opts.classes, opts.dim, opts.per_class, opts.spread, seed,
                                   all.out()),
          "generating blob dataset");
    if (opts.train_per_class > 0 && opts.train_per_class < opts.per_class) {
      check(feta_dataset_split_per_class(all, opts.train_per_class, split.train.out(),
                                         split.test.out()),
            "splitting blob dataset");
    } else {
      split.train = std::move(all);
    }
    return split;
  }

  if (opts.images.empty() || opts.labels.empty()) {
    throw CommandError(2, "idx data needs --images and --labels");
  }
  check(feta_dataset_load_idx(opts.images.c_str(), opts.labels.c_str(), split.train.out()),
        "loading train IDX data");
  if (opts.limit > 0) {
    DatasetHandle limited;
    check(feta_dataset_take(split.train, opts.limit, limited.out()), "limiting train data");
    split.train = std::move(limited);
  }
  if (!opts.test_images.empty() || !opts.test_labels.empty()) {
    if (opts.test_images.empty() || opts.test_labels.empty()) {
      throw CommandError(2, "idx test data needs both --test-images and --test-labels");
    }
    check(feta_dataset_load_idx(opts.test_images.c_str(), opts.test_labels.c_str(),
                                split.test.out()),
          "loading test IDX data");
    if (opts.test_limit > 0) {
      DatasetHandle limited;
      check(feta_dataset_take(split.test, opts.test_limit, limited.out()), "limiting test data");
      split.test = std::move(limited);
    }
  }
  return split;
}

double accuracy_of(const feta_network* net, const feta_dataset* data, const char* what) {
  double acc = 0.0;
  check(feta_network_accuracy(net, data, &acc), what);
  return acc;
}

double median(std::vector<double> values) {
  if (values.empty()) throw CommandError(2, "median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw CommandError(2, "slope needs at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || y[i] <= 0.0) throw CommandError(1, "slope needs positive samples");
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw CommandError(2, "slope needs at least two distinct sizes");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace cli
