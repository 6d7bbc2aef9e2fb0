#include <openssl/evp.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "slowman/pipeline.hpp"

namespace slowman {

namespace fs = std::filesystem;

namespace {

void append(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

// Long-format writer shared by the plot data files.
struct LongTable {
  std::string text = "theta,sigma,component,value\n";
  void row(double theta, double sigma, const std::string& component, double value) {
    append(text, theta);
    text += ',';
    append(text, sigma);
    text += ',';
    text += component;
    text += ',';
    append(text, value);
    text += '\n';
  }
};

void frame_curves(LongTable& t, const Frame& f, std::size_t col, const std::string& prefix,
                  const std::vector<std::string>& names) {
  const bool cx = f.representation == Representation::complex;
  for (std::size_t m = 0; m < f.points(); ++m) {
    for (std::size_t i = 0; i < f.dimension(); ++i) {
      const cplx v = f.values[m](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(col));
      if (cx) {
        t.row(f.theta(m), 0.0, prefix + names[i] + ".re", v.real());
        t.row(f.theta(m), 0.0, prefix + names[i] + ".im", v.imag());
      } else {
        t.row(f.theta(m), 0.0, prefix + names[i], v.real());
      }
    }
  }
}

void order_curves(LongTable& t, const std::vector<RealGrid>& W, const std::string& symbol,
                  const std::vector<std::string>& names) {
  for (std::size_t n = 0; n < W.size(); ++n) {
    for (std::size_t m = 0; m < W[n].points(); ++m) {
      for (std::size_t i = 0; i < W[n].arity(); ++i) {
        t.row(W[n].theta(m), 0.0, symbol + std::to_string(n) + "." + names[i], W[n](i, m));
      }
    }
  }
}

std::vector<double> sum_series(const std::vector<RealGrid>& W, std::size_t g, double sigma) {
  std::vector<double> out(W.front().arity(), 0.0);
  for (std::size_t n = W.size(); n-- > 0;) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] * sigma + W[n](i, g);
  }
  return out;
}

}  // namespace

std::string sha256_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("sha256 unavailable");
  }
  std::vector<char> buf(1 << 16);
  while (f) {
    f.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (f.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(f.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

void write_grid_csv(const fs::path& path, const RealGrid& grid, const std::vector<std::string>& names) {
  if (names.size() != grid.arity()) throw InvalidArgument("column names do not match grid arity");
  std::string text = "theta";
  for (const auto& n : names) text += "," + n;
  text += '\n';
  for (std::size_t m = 0; m < grid.points(); ++m) {
    append(text, grid.theta(m));
    for (std::size_t c = 0; c < grid.arity(); ++c) {
      text += ',';
      append(text, grid(c, m));
    }
    text += '\n';
  }
  write_text(path, text);
}

RealGrid read_grid_csv(const fs::path& path, const std::vector<std::string>& names, int period) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  std::string line;
  std::getline(f, line);
  auto header = split(line);
  std::vector<std::string> expect{"theta"};
  expect.insert(expect.end(), names.begin(), names.end());
  if (header != expect) throw IoError("'" + path.string() + "': unexpected header '" + line + "'");
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != expect.size()) throw IoError("'" + path.string() + "': ragged row");
    std::vector<double> row;
    for (const auto& c : cells) {
      char* end = nullptr;
      row.push_back(std::strtod(c.c_str(), &end));
      if (end == c.c_str()) throw IoError("'" + path.string() + "': bad number '" + c + "'");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("'" + path.string() + "': no data");
  RealGrid g(names.size(), rows.size(), period);
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t c = 0; c < names.size(); ++c) g(c, m) = rows[m][c + 1];
  }
  return g;
}

void write_series_csv(const fs::path& path, const FourierSeries& series, const std::vector<std::string>& names) {
  if (names.size() != series.arity()) throw InvalidArgument("column names do not match series arity");
  std::string text = "k";
  for (const auto& n : names) text += "," + n + ".re," + n + ".im";
  text += '\n';
  const long M = static_cast<long>(series.size());
  for (long k = -M / 2; k < M / 2; ++k) {
    text += std::to_string(k);
    for (std::size_t c = 0; c < series.arity(); ++c) {
      const cplx v = series.coeff(c, k);
      text += ',';
      append(text, v.real());
      text += ',';
      append(text, v.imag());
    }
    text += '\n';
  }
  write_text(path, text);
}

void write_frame_csv(const fs::path& path, const Frame& frame, const std::vector<std::string>& names) {
  const std::size_t d = frame.dimension();
  if (names.size() != d) throw InvalidArgument("column names do not match frame dimension");
  const bool cx = frame.representation == Representation::complex;
  const std::string tag = frame.kind == FrameKind::bundle ? "b" : "q";
  std::string text = "theta";
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      const std::string base = tag + std::to_string(j) + "." + names[i];
      text += cx ? "," + base + ".re," + base + ".im" : "," + base;
    }
  }
  text += '\n';
  for (std::size_t m = 0; m < frame.points(); ++m) {
    append(text, frame.theta(m));
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t i = 0; i < d; ++i) {
        const cplx v = frame.values[m](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        text += ',';
        append(text, v.real());
        if (cx) {
          text += ',';
          append(text, v.imag());
        }
      }
    }
    text += '\n';
  }
  write_text(path, text);
}

std::vector<fs::path> export_plotdata(const PipelineState& s, const fs::path& dir) {
  std::vector<fs::path> written;
  const auto names = s.model->component_names();
  const std::size_t d = names.size();
  auto save = [&](const std::string& file, const LongTable& t) {
    write_text(dir / file, t.text);
    written.push_back(dir / file);
  };

  if (s.bundle && s.adjoint) {
    LongTable bundles;
    for (std::size_t j = 0; j < d; ++j) frame_curves(bundles, *s.bundle, j, "b" + std::to_string(j) + ".", names);
    save("bundles.csv", bundles);
    // one file per adjoint column: the iPRC and the d-1 iARCs
    for (std::size_t j = 0; j < d; ++j) {
      LongTable t;
      frame_curves(t, *s.adjoint, j, "", names);
      save(j == 0 ? "iprc.csv" : "iarc_" + std::to_string(j) + ".csv", t);
    }
  }
  if (s.manifold) {
    LongTable t;
    order_curves(t, s.manifold->K, "K", names);
    save("K_orders.csv", t);
  }
  if (s.response) {
    LongTable z, i;
    order_curves(z, s.response->Z, "Z", names);
    order_curves(i, s.response->I, "I", names);
    save("Z_orders.csv", z);
    save("I_orders.csv", i);
  }
  if (s.manifold && s.response && s.validation) {
    const auto& m = *s.manifold;
    const auto& r = *s.response;
    const auto& dom = s.validation->domain;
    // surfaces over the domain at the largest tolerance
    const std::size_t tol = 0;
    const std::size_t N = m.points();
    const std::size_t step = std::max<std::size_t>(1, N / 128);
    const std::size_t ns = 33;
    std::size_t colour = 0;
    for (std::size_t i = 0; i < d; ++i) {
      if (names[i] == "V_e") colour = i;
    }
    LongTable surf, zsurf, isurf;
    for (std::size_t g = 0; g < N; g += step) {
      const double lo = -dom.lower[tol][g], hi = dom.upper[tol][g];
      for (std::size_t k = 0; k < ns; ++k) {
        const double sigma = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(ns - 1);
        const double theta = m.K[0].theta(g);
        const auto x = evaluate_manifold_at(m, g, sigma);
        const auto zv = sum_series(r.Z, g, sigma);
        const auto iv = sum_series(r.I, g, sigma);
        for (std::size_t i = 0; i < d; ++i) surf.row(theta, sigma, names[i], x[i]);
        surf.row(theta, sigma, "iprf." + names[colour], zv[colour]);
        for (std::size_t i = 0; i < d; ++i) {
          zsurf.row(theta, sigma, names[i], zv[i]);
          isurf.row(theta, sigma, names[i], iv[i]);
        }
      }
    }
    save("manifold_surface.csv", surf);
    save("iprf_surface.csv", zsurf);
    save("iarf_surface.csv", isurf);
  }
  return written;
}

}  // namespace slowman
