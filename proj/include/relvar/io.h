#pragma once

#include <string>
#include <vector>

#include "relvar/errors.h"
#include "relvar/simulate.h"

namespace relvar {

// How to read an observed series from disk.  Single-column files carry one
// value per line and need an explicit sampling interval; two-column CSV files
// carry time,value rows (the time grid must be uniform).  '#' lines are
// comments throughout; headers written by write_path_csv round-trip exactly.
struct IngestSpec {
  enum class Format { single_column, two_column };

  std::string path;
  Format format = Format::single_column;
  double delta = 0.0;     // required for single-column input
  int subsample = 1;      // keep every k-th observation
  double subperiod = 0.0; // analysis window length, 0 = whole series
  bool log_transform = false;

  void validate() const;
};

SamplePath ingest_series(const IngestSpec& spec);

// time,value CSV at full round-trip precision with '#' provenance lines plus
// machine-readable "# t0"/"# delta" headers so ingestion is bit-exact.
void write_path_csv(const std::string& file, const SamplePath& path,
                    const std::vector<std::string>& provenance);

// quantisation diagnostic: share of exactly-zero one-step increments
double zero_increment_fraction(const SamplePath& path);

std::string read_text_file(const std::string& file);
void write_text_file(const std::string& file, const std::string& text);

}  // namespace relvar
