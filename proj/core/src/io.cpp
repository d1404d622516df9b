#include "sqlab/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "json.hpp"

namespace sqlab {

namespace {

using json = nlohmann::json;

constexpr char kSignalMagic[8] = {'S', 'Q', 'L', 'A', 'B', 'S', 'I', 'G'};
constexpr char kFieldMagic[8] = {'S', 'Q', 'L', 'A', 'B', 'F', 'L', 'D'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  put_u64(out, bits);
}

struct Reader {
  const std::string& bytes;
  std::size_t pos = 0;

  void need(std::size_t k) const {
    if (pos + k > bytes.size()) throw IoError("truncated input");
  }
  void magic(const char (&m)[8]) {
    need(8);
    if (std::memcmp(bytes.data() + pos, m, 8) != 0) throw IoError("bad magic");
    pos += 8;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    pos += 8;
    return v;
  }
  double f64() {
    std::uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    return x;
  }
  void done() const {
    if (pos != bytes.size()) throw IoError("trailing bytes");
  }
};

double parse_double(const std::string& s) {
  double x = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || p != s.data() + s.size()) throw IoError("bad number: " + s);
  return x;
}

json cube_to_obj(const Cube& q) {
  json idx = json::array();
  for (int c = 0; c < q.n; ++c) idx.push_back(q.idx[c]);
  return json{{"n", q.n}, {"grid", q.grid}, {"level", q.level}, {"index", idx}, {"dilation", q.dilation}};
}

Cube cube_from_obj(const json& o) {
  Cube q;
  q.n = o.at("n").get<int>();
  if (q.n < 1 || q.n > 2) throw IoError("cube dimension out of range");
  q.grid = o.at("grid").get<int>();
  q.level = o.at("level").get<int>();
  const auto& idx = o.at("index");
  if (!idx.is_array() || static_cast<int>(idx.size()) != q.n) throw IoError("cube index arity mismatch");
  for (int c = 0; c < q.n; ++c) q.idx[c] = idx[c].get<long long>();
  q.dilation = o.value("dilation", 1);
  return q;
}

json parse_json(const std::string& text) {
  json o = json::parse(text, nullptr, false);
  if (o.is_discarded()) throw IoError("malformed json");
  return o;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw IoError("format_double failed");
  return std::string(buf, p);
}

std::string signal_csv(const Signal& f) {
  std::string out = "# sqlab-signal n=" + std::to_string(f.n) + " J=" + std::to_string(f.J) +
                    " K=" + std::to_string(f.K) + "\n";
  for (double x : f.v) {
    out += format_double(x);
    out.push_back('\n');
  }
  return out;
}

Signal signal_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty signal file");
  int n = 0, J = 0, K = 0;
  if (std::sscanf(line.c_str(), "# sqlab-signal n=%d J=%d K=%d", &n, &J, &K) != 3)
    throw IoError("bad signal header: " + line);
  Signal f(n, J, K);
  std::size_t i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= f.v.size()) throw IoError("too many values for grid");
    f.v[i++] = parse_double(line);
  }
  if (i != f.v.size()) throw IoError("value count does not match grid");
  return f;
}

std::string signal_bytes(const Signal& f) {
  std::string out(kSignalMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(f.n));
  put_u32(out, static_cast<std::uint32_t>(f.J));
  put_u32(out, static_cast<std::uint32_t>(f.K));
  put_u64(out, f.v.size());
  for (double x : f.v) put_f64(out, x);
  return out;
}

Signal signal_from_bytes(const std::string& bytes) {
  Reader r{bytes};
  r.magic(kSignalMagic);
  int n = static_cast<std::int32_t>(r.u32());
  int J = static_cast<std::int32_t>(r.u32());
  int K = static_cast<std::int32_t>(r.u32());
  if (n < 1 || n > 2) throw IoError("signal dimension out of range");
  std::uint64_t count = r.u64();
  Signal f(n, J, K);
  if (count != f.v.size()) throw IoError("value count does not match grid");
  for (double& x : f.v) x = r.f64();
  r.done();
  return f;
}

std::string field_bytes(const Field& F) {
  std::string out(kFieldMagic, 8);
  put_u32(out, static_cast<std::uint32_t>(F.n));
  put_u32(out, static_cast<std::uint32_t>(F.J));
  put_u32(out, static_cast<std::uint32_t>(F.K));
  put_u32(out, static_cast<std::uint32_t>(F.tg.L));
  put_f64(out, F.tg.t_min);
  put_f64(out, F.tg.ratio);
  put_u64(out, F.v.size());
  for (double x : F.v) put_f64(out, x);
  return out;
}

Field field_from_bytes(const std::string& bytes) {
  Reader r{bytes};
  r.magic(kFieldMagic);
  int n = static_cast<std::int32_t>(r.u32());
  int J = static_cast<std::int32_t>(r.u32());
  int K = static_cast<std::int32_t>(r.u32());
  if (n < 1 || n > 2) throw IoError("field dimension out of range");
  TGrid tg;
  tg.L = static_cast<std::int32_t>(r.u32());
  tg.t_min = r.f64();
  tg.ratio = r.f64();
  if (tg.L < 1 || !(tg.t_min > 0.0) || !(tg.ratio > 1.0)) throw IoError("bad t-grid header");
  std::uint64_t count = r.u64();
  Field F(n, J, K, tg);
  if (count != F.v.size()) throw IoError("value count does not match grid");
  for (double& x : F.v) x = r.f64();
  r.done();
  return F;
}

std::string cube_json(const Cube& q) { return cube_to_obj(q).dump(); }

Cube cube_from_json(const std::string& text) {
  try {
    return cube_from_obj(parse_json(text));
  } catch (const json::exception& e) {
    throw IoError(std::string("bad cube json: ") + e.what());
  }
}

std::string family_json(const SparseFamily& S, const SparseCertificate* cert) {
  json levels = json::array();
  for (const auto& gen : S.levels) {
    json row = json::array();
    for (const Cube& q : gen) row.push_back(cube_to_obj(q));
    levels.push_back(std::move(row));
  }
  json o{{"root", cube_to_obj(S.root)},
         {"origin", S.origin == FamilyOrigin::decomposition ? "decomposition" : "synthetic"},
         {"levels", std::move(levels)}};
  if (cert) {
    o["certificate"] = json{{"pass", cert->pass},
                            {"level_disjoint", cert->level_disjoint},
                            {"nested", cert->nested},
                            {"packing", cert->packing},
                            {"worst_packing", cert->worst_packing},
                            {"detail", cert->detail}};
  }
  return o.dump(2);
}

SparseFamily family_from_json(const std::string& text) {
  try {
    json o = parse_json(text);
    SparseFamily S;
    S.root = cube_from_obj(o.at("root"));
    std::string origin = o.value("origin", "synthetic");
    if (origin == "decomposition")
      S.origin = FamilyOrigin::decomposition;
    else if (origin == "synthetic")
      S.origin = FamilyOrigin::synthetic;
    else
      throw IoError("unknown family origin: " + origin);
    for (const auto& row : o.at("levels")) {
      std::vector<Cube> gen;
      for (const auto& c : row) gen.push_back(cube_from_obj(c));
      S.levels.push_back(std::move(gen));
    }
    return S;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad family json: ") + e.what());
  }
}

std::string scan_csv(const ScanResult& r) {
  std::string out;
  out += "# scan id=" + r.id + " x=" + r.x_name + " n=" + std::to_string(r.n) +
         " J=" + std::to_string(r.J) + " K=" + std::to_string(r.K) +
         " seed=" + std::to_string(r.seed) + " kernel=" + r.kernel + "\n";
  out += "# fit slope=" + format_double(r.fit.slope) + " intercept=" + format_double(r.fit.intercept) +
         " residual=" + format_double(r.fit.residual) + " points=" + std::to_string(r.fit.points) + "\n";
  if (!r.note.empty()) out += "# note " + r.note + "\n";
  out += r.x_name + ",measured,apchar,label\n";
  for (const ScanPoint& pt : r.points) {
    out += format_double(pt.x) + "," + format_double(pt.measured) + "," + format_double(pt.apchar) +
           "," + pt.label + "\n";
  }
  return out;
}

std::string scan_json(const ScanResult& r) {
  json points = json::array();
  for (const ScanPoint& pt : r.points)
    points.push_back(json{{"x", pt.x}, {"measured", pt.measured}, {"apchar", pt.apchar}, {"label", pt.label}});
  json o{{"id", r.id},
         {"x_name", r.x_name},
         {"n", r.n},
         {"J", r.J},
         {"K", r.K},
         {"seed", r.seed},
         {"kernel", r.kernel},
         {"note", r.note},
         {"points", std::move(points)},
         {"fit",
          json{{"slope", r.fit.slope},
               {"intercept", r.fit.intercept},
               {"residual", r.fit.residual},
               {"points", r.fit.points}}}};
  return o.dump(2);
}

void write_file(const std::string& path, const std::string& bytes) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + p.parent_path().string());
  }
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace sqlab
