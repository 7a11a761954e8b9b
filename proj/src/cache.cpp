#include "catsync/cache.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "catsync/config.hpp"
#include "catsync/errors.hpp"

namespace catsync {

namespace {

constexpr char kMagic[] = "CATSYNC\n";

void put(std::ostream& os, const double* p, std::size_t n) {
  os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}
bool get(std::istream& is, double* p, std::size_t n) {
  is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
  return static_cast<bool>(is);
}

}  // namespace

std::string cache_key(const CouplingSpec& spec, const SeriesSettings& s, int n_max) {
  std::ostringstream os;
  char eps[40];
  std::snprintf(eps, sizeof eps, "%.17g", spec.epsilon);
  os << "f1=" << spec.f1.to_string() << ";f2=" << spec.f2.to_string()
     << ";g=" << spec.g.to_string() << ";eps=" << eps << ";nphi=" << s.n_phi
     << ";nt=" << s.n_t << ";msum=" << s.m_sum << ";nmax=" << n_max << ";v=" << kCacheVersion;
  return sha256_hex(os.str());
}

void save_run(const std::string& path, const std::string& key, const CachedRun& run) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw NumericalError(NumericalError::Kind::Divergence, "cache: cannot write " + path);
    nlohmann::ordered_json h;
    h["version"] = kCacheVersion;
    h["key"] = key;
    h["series_orders"] = run.bundle.order();
    h["m_orders"] = run.mseries.order();
    h["frame_orders"] = run.frame.order();
    h["n_phi"] = run.bundle.settings().n_phi;
    h["n_t"] = run.bundle.settings().n_t;
    os << kMagic << h.dump() << "\n";
    for (int n = 1; n <= run.bundle.order(); ++n) {
      const SeriesOrder& o = run.bundle.at(n);
      for (const GridFunction* g : {&o.xi, &o.a_plus, &o.a_minus}) put(os, g->data().data(), g->data().size());
      for (const PhiFunction* f : {&o.U, &o.h_plus, &o.h_minus}) put(os, f->data(), f->size());
    }
    for (const MatrixField& m : run.mseries.orders)
      for (const auto& a : m) put(os, a.data(), 9);
    for (int n = 0; n < run.frame.order(); ++n) {
      for (const auto& a : run.frame.K[n]) put(os, a.data(), 9);
      for (const PhiFunction& f : run.frame.nu[n]) put(os, f.data(), f.size());
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

std::optional<CachedRun> load_run(const std::string& path, const std::string& key,
                                  const CouplingSpec& spec, const PhaseConstants& pc,
                                  const SeriesSettings& settings) {
  std::ifstream is(path, std::ios::binary);
  if (!is) return std::nullopt;
  std::string magic(sizeof kMagic - 1, '\0');
  is.read(magic.data(), static_cast<std::streamsize>(magic.size()));
  if (magic != kMagic) return std::nullopt;
  std::string line;
  std::getline(is, line);
  const auto h = nlohmann::json::parse(line, nullptr, false);
  if (h.is_discarded() || h.value("version", -1) != kCacheVersion || h.value("key", "") != key)
    return std::nullopt;

  CachedRun run{SeriesBundle(spec, pc, settings), {}, {}};
  const int np = run.bundle.grid().size();
  const int nt = settings.n_t;
  for (int n = 0; n < h["series_orders"].get<int>(); ++n) {
    SeriesOrder o;
    for (GridFunction* g : {&o.xi, &o.a_plus, &o.a_minus}) {
      *g = GridFunction(np, nt);
      if (!get(is, g->data().data(), g->data().size())) return std::nullopt;
    }
    for (PhiFunction* f : {&o.U, &o.h_plus, &o.h_minus}) {
      f->resize(np);
      if (!get(is, f->data(), f->size())) return std::nullopt;
    }
    run.bundle.append(std::move(o));
  }
  for (int n = 0; n < h["m_orders"].get<int>(); ++n) {
    MatrixField m(np);
    for (auto& a : m)
      if (!get(is, a.data(), 9)) return std::nullopt;
    run.mseries.orders.push_back(std::move(m));
  }
  for (int n = 0; n < h["frame_orders"].get<int>(); ++n) {
    MatrixField k(np);
    for (auto& a : k)
      if (!get(is, a.data(), 9)) return std::nullopt;
    std::array<PhiFunction, 3> nu;
    for (PhiFunction& f : nu) {
      f.resize(np);
      if (!get(is, f.data(), f.size())) return std::nullopt;
    }
    run.frame.K.push_back(std::move(k));
    run.frame.nu.push_back(std::move(nu));
  }
  return run;
}

}  // namespace catsync
