#ifndef FDIE_CSVIO_HPP
#define FDIE_CSVIO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "fdie/ident.hpp"
#include "fdie/runtime.hpp"

namespace fdie {

/// Dataset CSV: header `k,u1..um,y1..yl`, one row per sample, k from 0.
void write_dataset_csv(const std::filesystem::path& path, const IoDataset& d);
IoDataset read_dataset_csv(const std::filesystem::path& path);

/// Markov blocks, one per lag, `# lag b` comment line above each.
void write_markov_csv(const std::filesystem::path& path,
                      const MarkovSequence& seq);
MarkovSequence read_markov_csv(const std::filesystem::path& path);

/// Plain dense matrix, one row per line.
void write_matrix_csv(const std::filesystem::path& path, const Mat& m);
Mat read_matrix_csv(const std::filesystem::path& path);

/// Residual trace CSV: `k,r1..,norm`.
void write_residual_csv(const std::filesystem::path& path,
                        const ResidualTrace& trace);

/// Estimate trace CSV: `k,fhat1..`.
void write_estimates_csv(const std::filesystem::path& path,
                         const FaultEstimateTrace& trace);

/// Single-line JSON verdict record {filter_id, verdict, onset_k}.
void write_verdict_json(const std::filesystem::path& path,
                        const std::string& filter_id,
                        const std::string& verdict, int onset_k);

/// Filter bundle: matrix CSVs plus a JSON manifest with dimensions, spec,
/// poles and the synthesis-identity residuals.
void write_filter_bundle(const std::filesystem::path& dir,
                         const FilterRealization& f);

/// Run manifest: config hash, seeds, artifact versions.
void write_manifest(const std::filesystem::path& path,
                    const std::string& config_text, std::uint64_t seed,
                    const std::vector<std::string>& entries);

/// Minimal polyline SVG: one series per column of `ys` against `xs`.
void write_line_svg(const std::filesystem::path& path, const Vec& xs,
                    const Mat& ys, const std::string& title);

/// Scatter SVG of paired points.
void write_scatter_svg(const std::filesystem::path& path, const Vec& xs,
                       const Vec& ys, const std::string& title);

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace fdie

#endif
