/**
 * @file mesh.hpp
 * @brief Verified mesh extraction from mean-curvature-one surfaces and
 *        deterministic exporters: OBJ, binary PLY, CSV and a JSON report.
 *
 * Vertices carry both the raw Minkowski position/normal and their image in
 * the Poincaré-ball chart.  A vertex is masked when its evaluation throws a
 * typed error or when its jet-exact diagnostics exceed the verification
 * thresholds, so every unmasked vertex of a grid is certified.  Faces never
 * reference masked vertices.  A discrete mean-curvature estimate is computed
 * for comparison only; it plays no role in verification.
 */
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cmc1/bryant.hpp"
#include "json.hpp"

namespace cmc1 {

/// Verification thresholds: a vertex with |H - 1| or |<psi,psi> + 1| above
/// these is masked out of the exported mesh.
inline constexpr double kMeshMeanThreshold = 1e-6;
inline constexpr double kMeshMembershipThreshold = 1e-9;

/// Poincaré-ball image of a point on the unit hyperboloid.
inline std::array<double, 3> ball_point(const LVec4& p) {
  const double d = 1.0 + p.x0;
  return {p.x1 / d, p.x2 / d, p.x3 / d};
}

/// Unit normal in the ball chart: pushforward of the Minkowski normal by the
/// differential of the ball projection, Euclid-normalized (the chart is
/// conformal, so orthogonality to the surface is preserved).
inline std::array<double, 3> ball_normal(const LVec4& p, const LVec4& n) {
  const double d = 1.0 + p.x0;
  std::array<double, 3> w{n.x1 / d - p.x1 * n.x0 / (d * d),
                          n.x2 / d - p.x2 * n.x0 / (d * d),
                          n.x3 / d - p.x3 * n.x0 / (d * d)};
  const double len = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  if (!(len > 0.0) || !std::isfinite(len)) return {0.0, 0.0, 0.0};
  return {w[0] / len, w[1] / len, w[2] / len};
}

struct MeshVertex {
  double s = 0.0, t = 0.0;
  LVec4 position{};                     ///< psi in the Minkowski model
  LVec4 normal{};                       ///< oriented unit normal eta
  std::array<double, 3> ball{};         ///< Poincaré-ball position
  std::array<double, 3> ball_normal{};  ///< unit normal in the ball chart
  double mean = 0.0;                    ///< jet-exact mean curvature
  double lambda = 0.0;                  ///< conformal metric factor
  double mean_deviation = 0.0;          ///< |H - 1|
  double membership = 0.0;              ///< |<psi,psi> + 1|
  bool masked = true;
};

/// Row-major verified grid (index it*cols + is) with quad-split triangles.
/// When the surface period matches the s-extent of the rectangle the seam
/// column is identified with the first one (`stitched`), so the stored
/// column count drops to ns - 1 and faces wrap around in s.
struct MeshGrid {
  Rect rect{};
  int ns = 0, nt = 0;  ///< requested grid
  int cols = 0;        ///< stored s-columns: ns, or ns - 1 when stitched
  bool stitched = false;
  std::vector<MeshVertex> verts;
  std::vector<std::array<int, 3>> faces;  ///< all three corners unmasked

  double max_mean_deviation = 0.0;  ///< over unmasked vertices
  double max_membership = 0.0;
  /// Discrete-Laplacian mean-curvature deviation |H_disc - 1| over interior
  /// unmasked vertices; comparison column only, absent when no interior
  /// vertex has a full stencil.
  std::optional<double> max_discrete_mean_deviation;
  double total_curvature = 0.0;
  double dual_total_curvature = 0.0;
  bool curvature_valid = false;  ///< false for the umbilic special case

  double s(int is) const {
    return ns == 1
               ? rect.s_min
               : rect.s_min + (rect.s_max - rect.s_min) * is / double(ns - 1);
  }
  double t(int it) const {
    return nt == 1
               ? rect.t_min
               : rect.t_min + (rect.t_max - rect.t_min) * it / double(nt - 1);
  }
  const MeshVertex& at(int is, int it) const {
    return verts[static_cast<size_t>(it) * cols + is];
  }
  int masked_count() const {
    int m = 0;
    for (const auto& v : verts) m += v.masked ? 1 : 0;
    return m;
  }
  int vertex_count() const {
    return static_cast<int>(verts.size()) - masked_count();
  }
};

/// Sample the surface over rect (must lie inside the surface domain) on an
/// ns x nt grid.  Evaluation failures and diagnostic threshold violations
/// mask the vertex; throws EmptyGrid when nothing survives.
inline MeshGrid sample_mesh(const BryantSurface& surf, const Rect& rect,
                            int ns, int nt,
                            const Tolerances& tol = default_tol()) {
  if (ns < 1 || nt < 1)
    throw InvalidArgument("sample_mesh: grid must be at least 1x1");
  const Rect& dom = surf.domain();
  const double slack =
      1e-9 * (1.0 + std::abs(dom.s_max - dom.s_min) +
              std::abs(dom.t_max - dom.t_min));
  if (rect.s_min < dom.s_min - slack || rect.s_max > dom.s_max + slack ||
      rect.t_min < dom.t_min - slack || rect.t_max > dom.t_max + slack)
    throw InvalidArgument(
        "sample_mesh: the rectangle leaves the surface domain");

  MeshGrid out;
  out.rect = rect;
  out.ns = ns;
  out.nt = nt;
  out.stitched = surf.period().has_value() && ns >= 3 &&
                 std::abs((rect.s_max - rect.s_min) - *surf.period()) <= 1e-9;
  out.cols = out.stitched ? ns - 1 : ns;
  out.verts.assign(static_cast<size_t>(out.cols) * nt, MeshVertex{});

  parallel_for(out.cols, [&](int is) {
    const double s = out.s(is);
    for (int it = 0; it < nt; ++it) {
      MeshVertex v;
      v.s = s;
      v.t = out.t(it);
      try {
        const SurfaceJet jet = surf.eval(v.s, v.t);
        v.position = jet.psi;
        v.normal = jet.eta;
        v.ball = ball_point(jet.psi);
        v.ball_normal = cmc1::ball_normal(jet.psi, jet.eta);
        v.mean = jet.mean;
        v.lambda = jet.lambda;
        v.mean_deviation = std::abs(jet.mean - 1.0);
        v.membership = jet.membership;
        v.masked = v.mean_deviation > kMeshMeanThreshold ||
                   v.membership > kMeshMembershipThreshold ||
                   !(v.lambda > 0.0);
      } catch (const Error&) {
        v.masked = true;
      }
      out.verts[static_cast<size_t>(it) * out.cols + is] = v;
    }
  });
  if (out.masked_count() == out.cols * nt)
    throw EmptyGrid("sample_mesh: every grid node is masked");

  for (const auto& v : out.verts)
    if (!v.masked) {
      out.max_mean_deviation = std::max(out.max_mean_deviation,
                                        v.mean_deviation);
      out.max_membership = std::max(out.max_membership, v.membership);
    }

  // Quad-split triangles with the surface's conformal orientation; the
  // split runs along the (s,t) diagonal of each quad.
  auto idx = [&](int is, int it) { return it * out.cols + is; };
  auto unmasked = [&](int i) { return !out.verts[static_cast<size_t>(i)].masked; };
  const int s_quads = out.stitched ? out.cols : out.cols - 1;
  for (int it = 0; it + 1 < nt; ++it)
    for (int is = 0; is < s_quads; ++is) {
      const int is2 = (is + 1) % out.cols;
      const int v00 = idx(is, it), v10 = idx(is2, it);
      const int v11 = idx(is2, it + 1), v01 = idx(is, it + 1);
      if (unmasked(v00) && unmasked(v10) && unmasked(v11))
        out.faces.push_back({v00, v10, v11});
      if (unmasked(v00) && unmasked(v11) && unmasked(v01))
        out.faces.push_back({v00, v11, v01});
    }

  // Discrete Laplacian comparison: H_disc = <Delta psi, eta> / (2 lambda),
  // from Delta psi = 2 lambda (H eta + psi) for a conformal immersion.
  if (nt >= 3 && ns >= 3) {
    const double hs = (rect.s_max - rect.s_min) / (ns - 1);
    const double ht = (rect.t_max - rect.t_min) / (nt - 1);
    double worst = -1.0;
    for (int it = 1; it + 1 < nt; ++it)
      for (int is = 0; is < out.cols; ++is) {
        const bool interior_s = out.stitched || (is >= 1 && is + 1 < out.cols);
        if (!interior_s) continue;
        const int il = (is + out.cols - 1) % out.cols;
        const int ir = (is + 1) % out.cols;
        const MeshVertex& c = out.verts[idx(is, it)];
        const MeshVertex& e = out.verts[idx(ir, it)];
        const MeshVertex& w = out.verts[idx(il, it)];
        const MeshVertex& n = out.verts[idx(is, it + 1)];
        const MeshVertex& s5 = out.verts[idx(is, it - 1)];
        if (c.masked || e.masked || w.masked || n.masked || s5.masked)
          continue;
        const LVec4 lap =
            (1.0 / (hs * hs)) * (e.position + w.position) +
            (1.0 / (ht * ht)) * (n.position + s5.position) +
            (-2.0 / (hs * hs) - 2.0 / (ht * ht)) * c.position;
        const double hd =
            lorentz_inner(lap, c.normal) / (2.0 * c.lambda);
        worst = std::max(worst, std::abs(hd - 1.0));
      }
    if (worst >= 0.0) out.max_discrete_mean_deviation = worst;
  }

  // Curvature integrals over the same grid (undefined for the umbilic case).
  if (ns >= 2 && nt >= 2 && !surf.horosphere() && surf.secondary().valid()) {
    try {
      const MetricReport rep = metrics(surf, rect, ns, nt, tol);
      out.total_curvature = rep.total_curvature;
      out.dual_total_curvature = rep.dual_total_curvature;
      out.curvature_valid = true;
    } catch (const Error&) {
      out.curvature_valid = false;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exporters.
// ---------------------------------------------------------------------------

enum class MeshFormat { obj, ply, csv, json_report };

inline MeshFormat mesh_format_from_string(const std::string& name) {
  if (name == "obj") return MeshFormat::obj;
  if (name == "ply") return MeshFormat::ply;
  if (name == "csv") return MeshFormat::csv;
  if (name == "json-report") return MeshFormat::json_report;
  throw InvalidArgument("unknown mesh format '" + name +
                        "' (expected obj|ply|csv|json-report)");
}

namespace detail {

/// Shortest decimal that round-trips a double (up to 17 significant digits).
inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Write bytes to path atomically: temp file in place, then rename.
inline void write_file_atomic(const std::string& path,
                              const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw IoError("mesh export: cannot open '" + tmp + "' for writing");
  const size_t n = std::fwrite(bytes.data(), 1, bytes.size(), f);
  const bool closed = std::fclose(f) == 0;
  if (n != bytes.size() || !closed) {
    std::remove(tmp.c_str());
    throw IoError("mesh export: short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("mesh export: cannot rename '" + tmp + "' onto '" + path +
                  "'");
  }
}

/// Append a double as 8 little-endian bytes.
inline void put_f64_le(std::string& out, double x) {
  auto bytes = std::bit_cast<std::array<unsigned char, 8>>(x);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  out.append(reinterpret_cast<const char*>(bytes.data()), 8);
}

inline void put_i32_le(std::string& out, std::int32_t x) {
  auto bytes = std::bit_cast<std::array<unsigned char, 4>>(x);
  if constexpr (std::endian::native == std::endian::big)
    std::reverse(bytes.begin(), bytes.end());
  out.append(reinterpret_cast<const char*>(bytes.data()), 4);
}

/// Map grid vertex indices to compact output indices over unmasked vertices.
inline std::vector<int> output_index(const MeshGrid& grid) {
  std::vector<int> map(grid.verts.size(), -1);
  int next = 0;
  for (size_t i = 0; i < grid.verts.size(); ++i)
    if (!grid.verts[i].masked) map[i] = next++;
  return map;
}

inline std::string render_obj(const MeshGrid& grid) {
  const std::vector<int> remap = output_index(grid);
  std::string out;
  out.reserve(grid.verts.size() * 80 + grid.faces.size() * 24);
  for (const auto& v : grid.verts) {
    if (v.masked) continue;
    out += "v " + fmt17(v.ball[0]) + " " + fmt17(v.ball[1]) + " " +
           fmt17(v.ball[2]) + "\n";
  }
  for (const auto& v : grid.verts) {
    if (v.masked) continue;
    out += "vn " + fmt17(v.ball_normal[0]) + " " + fmt17(v.ball_normal[1]) +
           " " + fmt17(v.ball_normal[2]) + "\n";
  }
  for (const auto& f : grid.faces) {
    out += "f";
    for (int corner : f) {
      const std::string i = std::to_string(remap[corner] + 1);
      out += " " + i + "//" + i;
    }
    out += "\n";
  }
  return out;
}

inline std::string render_ply(const MeshGrid& grid) {
  const std::vector<int> remap = output_index(grid);
  std::string out;
  out += "ply\n";
  out += "format binary_little_endian 1.0\n";
  out += "element vertex " + std::to_string(grid.vertex_count()) + "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz"})
    out += std::string("property float64 ") + p + "\n";
  out += "element face " + std::to_string(grid.faces.size()) + "\n";
  out += "property list uchar int32 vertex_indices\n";
  out += "end_header\n";
  for (const auto& v : grid.verts) {
    if (v.masked) continue;
    for (double x : {v.ball[0], v.ball[1], v.ball[2], v.ball_normal[0],
                     v.ball_normal[1], v.ball_normal[2]})
      put_f64_le(out, x);
  }
  for (const auto& f : grid.faces) {
    out.push_back(static_cast<char>(3));
    for (int corner : f) put_i32_le(out, remap[corner]);
  }
  return out;
}

inline std::string render_csv(const MeshGrid& grid) {
  std::string out = "s,t,x0,x1,x2,x3,H\n";
  for (const auto& v : grid.verts) {
    if (v.masked) continue;
    out += fmt17(v.s) + "," + fmt17(v.t) + "," + fmt17(v.position.x0) + "," +
           fmt17(v.position.x1) + "," + fmt17(v.position.x2) + "," +
           fmt17(v.position.x3) + "," + fmt17(v.mean) + "\n";
  }
  return out;
}

inline std::string render_json_report(const MeshGrid& grid) {
  nlohmann::json j;
  j["rect"] = {{"s_min", grid.rect.s_min},
               {"s_max", grid.rect.s_max},
               {"t_min", grid.rect.t_min},
               {"t_max", grid.rect.t_max}};
  j["ns"] = grid.ns;
  j["nt"] = grid.nt;
  j["seam_stitched"] = grid.stitched;
  j["vertex_count"] = grid.vertex_count();
  j["face_count"] = grid.faces.size();
  j["mask_count"] = grid.masked_count();
  j["max_H_deviation"] = grid.max_mean_deviation;
  j["max_membership_defect"] = grid.max_membership;
  if (grid.max_discrete_mean_deviation)
    j["max_discrete_H_deviation"] = *grid.max_discrete_mean_deviation;
  else
    j["max_discrete_H_deviation"] = nullptr;
  j["curvature_valid"] = grid.curvature_valid;
  j["total_curvature"] = grid.total_curvature;
  j["dual_total_curvature"] = grid.dual_total_curvature;
  return j.dump(2) + "\n";
}

}  // namespace detail

/// Render the grid in the requested format and write it atomically.
inline void export_mesh(const MeshGrid& grid, MeshFormat format,
                        const std::string& path) {
  std::string bytes;
  switch (format) {
    case MeshFormat::obj: bytes = detail::render_obj(grid); break;
    case MeshFormat::ply: bytes = detail::render_ply(grid); break;
    case MeshFormat::csv: bytes = detail::render_csv(grid); break;
    case MeshFormat::json_report:
      bytes = detail::render_json_report(grid);
      break;
  }
  detail::write_file_atomic(path, bytes);
}

/// One CSV row: s, t, x0, x1, x2, x3, H.
using MeshCsvRow = std::array<double, 7>;

/// Parse CSV text produced by export_mesh (header line + numeric rows).
inline std::vector<MeshCsvRow> parse_mesh_csv(const std::string& text) {
  std::vector<MeshCsvRow> rows;
  size_t pos = text.find('\n');
  if (pos == std::string::npos)
    throw IoError("mesh csv: missing header line");
  ++pos;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    MeshCsvRow row{};
    const char* p = line.c_str();
    for (int k = 0; k < 7; ++k) {
      char* stop = nullptr;
      row[k] = std::strtod(p, &stop);
      if (stop == p)
        throw IoError("mesh csv: malformed row '" + line + "'");
      p = stop;
      if (k < 6) {
        if (*p != ',')
          throw IoError("mesh csv: expected ',' in row '" + line + "'");
        ++p;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

/// Read back a CSV file written by export_mesh.
inline std::vector<MeshCsvRow> load_mesh_csv(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("mesh csv: cannot open '" + path + "'");
  std::string text;
  char buf[1 << 16];
  size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
  std::fclose(f);
  return parse_mesh_csv(text);
}

}  // namespace cmc1
