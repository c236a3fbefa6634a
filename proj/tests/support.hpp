#pragma once

// Shared helpers for the test binaries: random problem builders and a tiny
// process runner for the tests that exercise the installed CLI.

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/rng.hpp"

namespace feta::testing {

inline Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev = 1.0) {
  Matrix m(rows, cols);
  rng.fill_normal(m, stddev);
  return m;
}

// Plain triple-loop product, the oracle for every optimized matmul variant.
inline Matrix matmul_naive(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) acc += a(i, p) * b(p, j);
      c(i, j) = acc;
    }
  return c;
}

inline double rel_diff(const Matrix& got, const Matrix& want) {
  return frobenius_norm(sub(got, want)) / (1.0 + frobenius_norm(want));
}

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout only; stderr goes to the test log
};

// Runs a command line through the shell and captures stdout.
inline RunResult run_command(const std::string& command) {
  RunResult r;
  std::FILE* pipe = popen(command.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed for: " + command);
  std::array<char, 4096> buf;
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    r.output.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  if (WIFEXITED(status)) {
    r.exit_code = WEXITSTATUS(status);
  }
  return r;
}

// Strips a named column from CSV text; the determinism checks compare
// everything except wall-clock cells. Assumes no quoted commas in the rows
// it is used on (numeric pipeline output).
inline std::string drop_csv_column(const std::string& csv, const std::string& header_name) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : csv) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  if (lines.empty()) return csv;

  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    return cells;
  };

  const std::vector<std::string> header = split(lines[0]);
  std::size_t drop = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == header_name) drop = i;
  }
  if (drop == header.size()) return csv;

  std::string out;
  for (const std::string& line : lines) {
    std::vector<std::string> cells = split(line);
    std::string joined;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i == drop) continue;
      if (!joined.empty()) joined += ',';
      joined += cells[i];
    }
    out += joined;
    out += '\n';
  }
  return out;
}

// Temp file that cleans up after itself.
class TempFile {
 public:
  explicit TempFile(const std::string& suffix) {
    static int counter = 0;
    path_ = "/tmp/feta_test_" + std::to_string(getpid()) + "_" + std::to_string(counter++) +
            suffix;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace feta::testing
