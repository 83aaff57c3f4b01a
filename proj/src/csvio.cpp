#include "fdie/csvio.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fdie {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? "."
                                          : path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::vector<double> split_csv_line(const std::string& line) {
  std::vector<double> vals;
  std::stringstream ss(line);
  std::string tok;
  while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
  return vals;
}

}  // namespace

void write_dataset_csv(const std::filesystem::path& path, const IoDataset& d) {
  auto out = open_out(path);
  out << "k";
  for (int c = 1; c <= d.m(); ++c) out << ",u" << c;
  for (int c = 1; c <= d.l(); ++c) out << ",y" << c;
  out << "\n";
  for (int k = 0; k < d.T(); ++k) {
    out << k;
    for (int c = 0; c < d.m(); ++c) out << "," << d.U(c, k);
    for (int c = 0; c < d.l(); ++c) out << "," << d.Y(c, k);
    out << "\n";
  }
}

IoDataset read_dataset_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  int m = 0, l = 0;
  {
    std::stringstream ss(header);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.rfind("u", 0) == 0) ++m;
      if (tok.rfind("y", 0) == 0) ++l;
    }
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(split_csv_line(line));
  IoDataset d;
  d.U = Mat(m, rows.size());
  d.Y = Mat(l, rows.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    for (int c = 0; c < m; ++c) d.U(c, k) = rows[k][1 + c];
    for (int c = 0; c < l; ++c) d.Y(c, k) = rows[k][1 + m + c];
  }
  return d;
}

void write_markov_csv(const std::filesystem::path& path,
                      const MarkovSequence& seq) {
  auto out = open_out(path);
  out << "# markov blocks l=" << seq.l() << " m=" << seq.m()
      << " L=" << seq.L() << " source="
      << (seq.source == MarkovSource::exact ? "exact" : "estimated") << "\n";
  for (int b = 0; b <= seq.L(); ++b) {
    out << "# lag " << b << "\n";
    const Mat& h = seq.H[b];
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      for (Eigen::Index c = 0; c < h.cols(); ++c)
        out << h(r, c) << (c + 1 < h.cols() ? "," : "");
      out << "\n";
    }
  }
}

MarkovSequence read_markov_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string line;
  MarkovSequence seq;
  std::vector<std::vector<double>> block;
  auto flush = [&]() {
    if (block.empty()) return;
    Mat h(block.size(), block[0].size());
    for (size_t r = 0; r < block.size(); ++r)
      for (size_t c = 0; c < block[r].size(); ++c) h(r, c) = block[r][c];
    seq.H.push_back(h);
    block.clear();
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# lag", 0) == 0) flush();
      if (line.find("source=exact") != std::string::npos)
        seq.source = MarkovSource::exact;
      continue;
    }
    block.push_back(split_csv_line(line));
  }
  flush();
  return seq;
}

void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
  auto out = open_out(path);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      out << m(r, c) << (c + 1 < m.cols() ? "," : "");
    out << "\n";
  }
}

Mat read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(split_csv_line(line));
  if (rows.empty()) return Mat();
  Mat m(rows.size(), rows[0].size());
  for (size_t r = 0; r < rows.size(); ++r)
    for (size_t c = 0; c < rows[r].size(); ++c) m(r, c) = rows[r][c];
  return m;
}

void write_residual_csv(const std::filesystem::path& path,
                        const ResidualTrace& trace) {
  auto out = open_out(path);
  out << "k";
  for (Eigen::Index c = 1; c <= trace.monitored.cols(); ++c) out << ",r" << c;
  out << ",norm\n";
  for (Eigen::Index k = 0; k < trace.monitored.rows(); ++k) {
    out << (k + trace.i);
    for (Eigen::Index c = 0; c < trace.monitored.cols(); ++c)
      out << "," << trace.monitored(k, c);
    out << "," << trace.norms(k) << "\n";
  }
}

void write_estimates_csv(const std::filesystem::path& path,
                         const FaultEstimateTrace& trace) {
  auto out = open_out(path);
  out << "k";
  for (Eigen::Index c = 1; c <= trace.f_hat.cols(); ++c) out << ",fhat" << c;
  out << "\n";
  for (Eigen::Index k = 0; k < trace.f_hat.rows(); ++k) {
    out << k;
    for (Eigen::Index c = 0; c < trace.f_hat.cols(); ++c)
      out << "," << trace.f_hat(k, c);
    out << "\n";
  }
}

void write_verdict_json(const std::filesystem::path& path,
                        const std::string& filter_id,
                        const std::string& verdict, int onset_k) {
  nlohmann::json j;
  j["filter_id"] = filter_id;
  j["verdict"] = verdict;
  j["onset_k"] = onset_k;
  auto out = open_out(path);
  out << j.dump() << "\n";
}

void write_filter_bundle(const std::filesystem::path& dir,
                         const FilterRealization& f) {
  std::filesystem::create_directories(dir);
  write_matrix_csv(dir / "Ar.csv", f.Ar);
  write_matrix_csv(dir / "Br.csv", f.Br);
  write_matrix_csv(dir / "Lr.csv", f.Lr);
  write_matrix_csv(dir / "D_pm.csv", f.D_pm);
  nlohmann::json j;
  j["kind"] = to_string(f.spec.kind);
  j["i"] = f.spec.i;
  j["p"] = f.spec.sel.p();
  j["q"] = f.spec.sel.q();
  j["l"] = f.spec.sel.l();
  j["m"] = f.spec.sel.m();
  j["poles"] = f.spec.ar_poles;
  j["reduced"] = f.reduced;
  j["exact"] = f.exact;
  j["rho"] = f.rho;
  j["eq_sum_residual"] = f.eq_sum_residual;
  j["eq_qplus_residual"] = f.eq_qplus_residual;
  j["eq_br_residual"] = f.eq_br_residual;
  auto out = open_out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void write_manifest(const std::filesystem::path& path,
                    const std::string& config_text, std::uint64_t seed,
                    const std::vector<std::string>& entries) {
  nlohmann::json j;
  j["config_hash"] = fnv1a_hash(config_text);
  j["seed"] = seed;
  j["artifact_version"] = 1;
  j["entries"] = entries;
  auto out = open_out(path);
  out << j.dump(2) << "\n";
}

namespace {

void svg_header(std::ofstream& out, int w, int h, const std::string& title) {
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w
      << "' height='" << h << "' viewBox='0 0 " << w << " " << h << "'>\n"
      << "<rect width='100%' height='100%' fill='white'/>\n"
      << "<text x='10' y='16' font-size='12'>" << title << "</text>\n";
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                         "#ff7f0e", "#8c564b"};

}  // namespace

void write_line_svg(const std::filesystem::path& path, const Vec& xs,
                    const Mat& ys, const std::string& title) {
  const int W = 720, H = 360, pad = 30;
  auto out = open_out(path);
  svg_header(out, W, H, title);
  if (xs.size() > 1 && ys.rows() == xs.size()) {
    const double xmin = xs.minCoeff(), xmax = xs.maxCoeff();
    double ymin = ys.minCoeff(), ymax = ys.maxCoeff();
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    for (Eigen::Index s = 0; s < ys.cols(); ++s) {
      out << "<polyline fill='none' stroke='" << kColors[s % 6]
          << "' stroke-width='1' points='";
      for (Eigen::Index k = 0; k < xs.size(); ++k) {
        const double x =
            pad + (W - 2 * pad) * (xs(k) - xmin) / (xmax - xmin + 1e-300);
        const double y =
            H - pad - (H - 2 * pad) * (ys(k, s) - ymin) / (ymax - ymin);
        out << x << "," << y << " ";
      }
      out << "'/>\n";
    }
  }
  out << "</svg>\n";
}

void write_scatter_svg(const std::filesystem::path& path, const Vec& xs,
                       const Vec& ys, const std::string& title) {
  const int W = 480, H = 480, pad = 30;
  auto out = open_out(path);
  svg_header(out, W, H, title);
  if (xs.size() > 0) {
    double xmin = xs.minCoeff(), xmax = xs.maxCoeff();
    double ymin = ys.minCoeff(), ymax = ys.maxCoeff();
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;
    for (Eigen::Index k = 0; k < xs.size(); ++k) {
      const double x = pad + (W - 2 * pad) * (xs(k) - xmin) / (xmax - xmin);
      const double y = H - pad - (H - 2 * pad) * (ys(k) - ymin) / (ymax - ymin);
      out << "<circle cx='" << x << "' cy='" << y
          << "' r='2.5' fill='none' stroke='#1f77b4'/>\n";
    }
  }
  out << "</svg>\n";
}

}  // namespace fdie
