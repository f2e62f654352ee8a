#include "ffexp/cache.hpp"

#include <fstream>
#include <sstream>

#include <unistd.h>

namespace ffexp {

namespace {

constexpr const char* kMagic = "ffexp-cache";
constexpr const char* kVersion = "v1";

std::string header(const std::string& kind, const std::string& hash)
{
  return std::string(kMagic) + " " + kVersion + " " + kind + " " + hash;
}

}  // namespace

Cache::Cache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path Cache::file(const std::string& kind, const std::string& hash) const
{
  return dir_ / (kind + "-" + hash + ".cache");
}

std::optional<std::string> Cache::read(const std::string& kind, const std::string& hash) const
{
  const auto path = file(kind, hash);
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::string first;
  std::getline(in, first);
  std::istringstream hs(first);
  std::string magic, version, k, h;
  hs >> magic >> version >> k >> h;
  if (magic != kMagic)
    throw CacheError(path.string() + ": not an ffexp cache file");
  if (version != kVersion)
    throw CacheError(path.string() + ": cache version " + version + ", expected " + kVersion);
  if (k != kind || h != hash)
    throw CacheError(path.string() + ": header names " + k + " " + h + ", expected " + kind + " " + hash);
  std::ostringstream rest;
  rest << in.rdbuf();
  return rest.str();
}

void Cache::write(const std::string& kind, const std::string& hash, const std::string& payload) const
{
  std::filesystem::create_directories(dir_);
  const auto path = file(kind, hash);
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw CacheError("cannot write " + tmp.string());
    out << header(kind, hash) << '\n' << payload;
    out.flush();
    if (!out)
      throw CacheError("short write on " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string serialize_group(const GroupEnum& g)
{
  const MatAlgebra& alg = g.algebra();
  std::ostringstream os;
  os << "quotient " << to_string(g.quotient()) << '\n';
  os << "generators " << g.generators().size();
  for (const Mat& m : g.generators())
    os << ' ' << alg.encode(m);
  os << '\n';
  os << "generator_ids";
  for (Id x : g.generator_ids())
    os << ' ' << x;
  os << '\n';
  os << "order " << g.order() << '\n';
  const auto& keys = g.keys();
  for (std::size_t i = 0; i < keys.size(); ++i)
    os << keys[i] << ((i % 16 == 15 || i + 1 == keys.size()) ? '\n' : ' ');
  return os.str();
}

GroupEnum deserialize_group(std::shared_ptr<const MatAlgebra> algebra, Quotient q, const std::string& payload)
{
  std::istringstream in(payload);
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(in >> w) || w != word)
      throw CacheError("group cache: expected '" + word + "'");
  };
  expect("quotient");
  std::string qs;
  in >> qs;
  if (qs != to_string(q))
    throw CacheError("group cache: quotient " + qs + " does not match " + to_string(q));
  expect("generators");
  std::size_t k = 0;
  in >> k;
  std::vector<Mat> gens;
  for (std::size_t i = 0; i < k; ++i) {
    std::uint64_t key = 0;
    if (!(in >> key))
      throw CacheError("group cache: truncated generator list");
    gens.push_back(algebra->decode(key));
  }
  expect("generator_ids");
  std::vector<Id> gen_ids(k);
  for (auto& x : gen_ids)
    if (!(in >> x))
      throw CacheError("group cache: truncated generator ids");
  expect("order");
  std::size_t n = 0;
  in >> n;
  std::vector<std::uint64_t> keys(n);
  for (auto& key : keys)
    if (!(in >> key))
      throw CacheError("group cache: truncated element list");
  GroupEnum g = GroupEnum::from_keys(std::move(algebra), std::move(keys), std::move(gens), q);
  if (g.generator_ids() != gen_ids)
    throw CacheError("group cache: generator ids do not match the stored elements");
  return g;
}

}  // namespace ffexp
