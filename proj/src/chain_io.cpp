#include "bbt/chain_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "bbt/error.hpp"

namespace bbt {

static_assert(std::endian::native == std::endian::little, "chain dump assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'B', 'B', 'T', 'C', 'H', 'A', 'I', 'N'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v, const std::filesystem::path& path) {
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
    throw IoError("chain dump '" + path.string() + "' is truncated (header)");
}

}  // namespace

nlohmann::ordered_json to_json(const SamplerConfig& c) {
  nlohmann::ordered_json j;
  j["beta"] = c.beta;
  j["chi"] = c.chi;
  j["omega"] = c.omega;
  j["iterations"] = c.iterations;
  j["burn_in"] = c.burn_in;
  j["thin"] = c.thin;
  j["seed"] = c.seed;
  j["kernel"] = {{"kind", to_string(c.kernel.kind)},
                 {"length_scale", c.kernel.length_scale},
                 {"mixture", c.kernel.mixture}};
  j["rank_adjusted_shape"] = c.rank_adjusted_shape;
  j["conjugate_scale"] = c.conjugate_scale;
  j["fixed_alpha2"] = c.fixed_alpha2 ? nlohmann::ordered_json(*c.fixed_alpha2) : nlohmann::ordered_json();
  return j;
}

SamplerConfig sampler_config_from_json(const nlohmann::json& j) {
  SamplerConfig c;
  c.beta = j.at("beta").get<double>();
  c.chi = j.at("chi").get<double>();
  c.omega = j.at("omega").get<double>();
  c.iterations = j.at("iterations").get<std::int64_t>();
  c.burn_in = j.at("burn_in").get<std::int64_t>();
  c.thin = j.at("thin").get<std::int64_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto& k = j.at("kernel");
  c.kernel.kind = parse_kernel_kind(k.at("kind").get<std::string>());
  c.kernel.length_scale = k.at("length_scale").get<double>();
  c.kernel.mixture = k.at("mixture").get<double>();
  c.rank_adjusted_shape = j.at("rank_adjusted_shape").get<bool>();
  c.conjugate_scale = j.value("conjugate_scale", false);
  if (j.contains("fixed_alpha2") && !j.at("fixed_alpha2").is_null())
    c.fixed_alpha2 = j.at("fixed_alpha2").get<double>();
  return c;
}

void save_chain(const ChainSamples& s, const std::filesystem::path& path) {
  nlohmann::ordered_json meta;
  meta["format"] = "bbt-chain";
  meta["entities"] = s.entities;
  meta["columns"] = {"alpha2", "loglik", "quadform", "mu..."};
  meta["kept"] = static_cast<std::int64_t>(s.num_kept());
  meta["accepted"] = s.accepted;
  meta["proposed"] = s.proposed;
  meta["jitter_applied"] = s.jitter_applied;
  meta["config"] = to_json(s.config);
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write chain dump '" + path.string() + "'");
  out.write(kMagic, sizeof kMagic);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));

  const auto m = s.mu_draws.cols();
  std::vector<double> row(static_cast<std::size_t>(m + 3));
  for (Eigen::Index r = 0; r < s.num_kept(); ++r) {
    row[0] = s.alpha2_draws[r];
    row[1] = s.loglik_draws[r];
    row[2] = s.quadform_draws[r];
    for (Eigen::Index j = 0; j < m; ++j) row[static_cast<std::size_t>(j + 3)] = s.mu_draws(r, j);
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
  if (!out) throw IoError("write failure on chain dump '" + path.string() + "'");
}

ChainSamples load_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open chain dump '" + path.string() + "'");
  char magic[8];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw ValidationError("'" + path.string() + "' is not a chain dump");
  std::uint32_t version = 0;
  read_pod(in, version, path);
  if (version != kVersion)
    throw ValidationError("unsupported chain dump version " + std::to_string(version));
  std::uint64_t len = 0;
  read_pod(in, len, path);
  if (len > (1u << 30)) throw ValidationError("chain dump metadata length is implausible");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len)))
    throw IoError("chain dump '" + path.string() + "' is truncated (metadata)");

  ChainSamples s;
  std::int64_t kept = 0;
  try {
    const auto meta = nlohmann::json::parse(text);
    s.entities = meta.at("entities").get<std::vector<std::string>>();
    kept = meta.at("kept").get<std::int64_t>();
    s.accepted = meta.at("accepted").get<std::int64_t>();
    s.proposed = meta.at("proposed").get<std::int64_t>();
    s.jitter_applied = meta.at("jitter_applied").get<bool>();
    s.config = sampler_config_from_json(meta.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("chain dump '" + path.string() + "' has corrupt metadata: " + e.what());
  }
  if (kept < 0 || s.accepted < 0 || s.accepted > s.proposed)
    throw ValidationError("chain dump '" + path.string() + "' has inconsistent counts");

  const auto m = static_cast<Eigen::Index>(s.entities.size());
  s.mu_draws.resize(kept, m);
  s.alpha2_draws.resize(kept);
  s.loglik_draws.resize(kept);
  s.quadform_draws.resize(kept);
  std::vector<double> row(static_cast<std::size_t>(m + 3));
  for (Eigen::Index r = 0; r < kept; ++r) {
    if (!in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double))))
      throw IoError("chain dump '" + path.string() + "' is truncated at row " + std::to_string(r) +
                    " of " + std::to_string(kept));
    s.alpha2_draws[r] = row[0];
    s.loglik_draws[r] = row[1];
    s.quadform_draws[r] = row[2];
    for (Eigen::Index j = 0; j < m; ++j) s.mu_draws(r, j) = row[static_cast<std::size_t>(j + 3)];
  }
  if (in.peek() != std::char_traits<char>::eof())
    throw ValidationError("chain dump '" + path.string() + "' has trailing bytes");
  return s;
}

}  // namespace bbt
