#pragma once

#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "feta/feta.h"

namespace cli {

// Exit codes: 0 success, 1 numerical failure (divergence, or only vacuous
// bounds where a finite one was required), 2 usage/input errors.
struct CommandError : std::runtime_error {
  int exit_code;
  CommandError(int code, const std::string& msg) : std::runtime_error(msg), exit_code(code) {}
};

// Maps a library status to the right exit code and throws with context.
inline void check(feta_status st, const std::string& what) {
  if (st == FETA_OK) return;
  const int code = (st == FETA_ERR_DIVERGED || st == FETA_ERR_VACUOUS) ? 1 : 2;
  throw CommandError(code, what + ": " + feta_status_name(st) + " (" + feta_last_error() + ")");
}

// RAII over the C handles.
template <typename T, void (*Free)(T*)>
class Handle {
 public:
  Handle() = default;
  ~Handle() { Free(ptr_); }
  Handle(Handle&& o) noexcept : ptr_(std::exchange(o.ptr_, nullptr)) {}
  Handle& operator=(Handle&& o) noexcept {
    if (this != &o) {
      Free(ptr_);
      ptr_ = std::exchange(o.ptr_, nullptr);
    }
    return *this;
  }
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;

  T** out() {
    Free(ptr_);
    ptr_ = nullptr;
    return &ptr_;
  }
  T* get() const { return ptr_; }
  operator T*() const { return ptr_; }
  explicit operator bool() const { return ptr_ != nullptr; }

 private:
  T* ptr_ = nullptr;
};

using MatrixHandle = Handle<feta_matrix, feta_matrix_free>;
using DatasetHandle = Handle<feta_dataset, feta_dataset_free>;
using LayerDataHandle = Handle<feta_layerdata, feta_layerdata_free>;
using NetworkHandle = Handle<feta_network, feta_network_free>;
using PruneResultHandle = Handle<feta_prune_result, feta_prune_result_free>;

// Full-precision float cell; round-trips doubles exactly, so seeded runs
// emit bit-identical CSV.
inline std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::string fmt_seconds(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Quotes a cell if it contains separators/quotes/newlines (the numeric cells
// never do; dataset paths might).
std::string csv_cell(const std::string& raw);
std::string csv_row(const std::vector<std::string>& cells);

// Output sink for CSV rows: a file when --csv is given, stdout otherwise.
class CsvSink {
 public:
  // path empty => stdout. The file is opened (truncating) immediately so a
  // bad path fails before any work happens.
  explicit CsvSink(const std::string& path);
  ~CsvSink();
  CsvSink(const CsvSink&) = delete;
  CsvSink& operator=(const CsvSink&) = delete;

  void row(const std::vector<std::string>& cells);
  // Writes an already-formatted line (must include its newline).
  void raw(const std::string& line);

 private:
  std::FILE* file_ = nullptr;
  bool owned_ = false;
};

// ------------------------------------------------------------------
// Shared dataset selection flags.

struct DataOpts {
  std::string source = "blobs";  // blobs | idx

  // blobs
  std::int32_t classes = 10;
  std::size_t dim = 64;
  std::size_t per_class = 1200;
  double spread = 3.0;
  std::size_t train_per_class = 1000;  // 0 = no split, everything is train

  // idx
  std::string images, labels;
  std::string test_images, test_labels;
  std::size_t limit = 0;       // 0 = all
  std::size_t test_limit = 0;

  std::uint64_t data_seed = 0;
  bool data_seed_set = false;
};

void add_data_flags(CLI::App* cmd, DataOpts& opts);

struct DataSplit {
  DatasetHandle train;
  DatasetHandle test;  // may be empty

  const feta_dataset* eval() const { return test ? test.get() : train.get(); }
};

// Builds the train/test datasets from the flags. default_seed feeds blob
// generation when --data-seed was not given, so the same --seed regenerates
// the same data across commands.
DataSplit materialize(const DataOpts& opts, std::uint64_t default_seed);

double accuracy_of(const feta_network* net, const feta_dataset* data, const char* what);

// Simple stats used by bench and the bound commands.
double median(std::vector<double> values);
// Least-squares slope of log(y) against log(x); requires >= 2 distinct x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace cli
