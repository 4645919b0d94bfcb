#pragma once

#include <bit>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "wmlab/data/watermark.hpp"
#include "wmlab/img/image.hpp"
#include "wmlab/nn/arch.hpp"

namespace wmlab::nn {

enum class Role { embedder, retriever, discriminator, ow_embedder, ow_retriever, surrogate };
enum class Arch { skipunet, ceil, patchcritic, convstack, res16 };

inline const char* role_name(Role r) {
  switch (r) {
    case Role::embedder: return "embedder";
    case Role::retriever: return "retriever";
    case Role::discriminator: return "discriminator";
    case Role::ow_embedder: return "ow_embedder";
    case Role::ow_retriever: return "ow_retriever";
    case Role::surrogate: return "surrogate";
  }
  return "?";
}

inline const char* arch_name(Arch a) {
  switch (a) {
    case Arch::skipunet: return "skipunet";
    case Arch::ceil: return "ceil";
    case Arch::patchcritic: return "patchcritic";
    case Arch::convstack: return "convstack";
    case Arch::res16: return "res16";
  }
  return "?";
}

inline Role parse_role(const std::string& s) {
  for (Role r : {Role::embedder, Role::retriever, Role::discriminator, Role::ow_embedder,
                 Role::ow_retriever, Role::surrogate})
    if (s == role_name(r)) return r;
  throw std::runtime_error("unknown role '" + s + "'");
}

inline Arch parse_arch(const std::string& s) {
  for (Arch a : {Arch::skipunet, Arch::ceil, Arch::patchcritic, Arch::convstack, Arch::res16})
    if (s == arch_name(a)) return a;
  throw std::runtime_error("unknown arch '" + s + "'");
}

inline bool role_arch_compatible(Role r, Arch a) {
  switch (r) {
    case Role::embedder: return a == Arch::skipunet;
    case Role::ow_embedder: return a == Arch::skipunet;
    case Role::retriever: return a == Arch::ceil;
    case Role::ow_retriever: return a == Arch::convstack;
    case Role::discriminator: return a == Arch::patchcritic;
    case Role::surrogate: return a == Arch::skipunet || a == Arch::res16;
  }
  return false;
}

// Training provenance carried inside checkpoints.
struct ModelMeta {
  std::string stage;
  int epoch = 0;
  uint64_t seed = 0;
  std::string loss_weights;  // serialized LossWeights, informational
};

template <typename T>
struct Model {
  Role role = Role::embedder;
  Arch arch = Arch::skipunet;
  ArchConfig cfg;
  uint64_t seed = 0;
  ModelMeta meta;
  ParamStore<T> store;
  std::variant<SkipUNet<T>, CeilNet<T>, PatchCritic<T>, ConvStack<T>, ResNetS<T>> net;

  ad::Var<T> net_forward(const Binding<T>& b, const ad::Var<T>& x) const {
    return std::visit([&](const auto& n) { return n.forward(b, x); }, net);
  }
  Binding<T> bind(bool trainable) const { return Binding<T>::bind(store, trainable); }
};

template <typename T>
Model<T> make_model(Role role, Arch arch, const ArchConfig& cfg, uint64_t seed) {
  check(role_arch_compatible(role, arch), std::string("role ") + role_name(role) +
                                              " is incompatible with arch " + arch_name(arch));
  Model<T> m;
  m.role = role;
  m.arch = arch;
  m.cfg = cfg;
  m.seed = seed;
  m.meta.seed = seed;
  RandomSource rng(seed);
  switch (arch) {
    case Arch::skipunet: m.net = SkipUNet<T>(m.store, rng, cfg); break;
    case Arch::ceil: m.net = CeilNet<T>(m.store, rng, cfg); break;
    case Arch::patchcritic: m.net = PatchCritic<T>(m.store, rng, cfg); break;
    case Arch::convstack: m.net = ConvStack<T>(m.store, rng, cfg); break;
    case Arch::res16: m.net = ResNetS<T>(m.store, rng, cfg); break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// role-level graph builders

// container = cover + f(concat(cover, watermark))
template <typename T>
ad::Var<T> embed_graph(const Model<T>& m, const Binding<T>& b, const ad::Var<T>& cover,
                       const ad::Var<T>& wm) {
  check(m.role == Role::embedder || m.role == Role::ow_embedder, "embed: wrong role");
  check(cover->val.h() == wm->val.h() && cover->val.w() == wm->val.w(),
        "embed: cover and watermark sizes differ");
  return ad::add(cover, m.net_forward(b, ad::concat_channels(cover, wm)));
}

template <typename T>
ad::Var<T> retrieve_graph(const Model<T>& m, const Binding<T>& b, const ad::Var<T>& x) {
  check(m.role == Role::retriever || m.role == Role::ow_retriever, "retrieve: wrong role");
  return ad::sigmoid(m.net_forward(b, x));
}

template <typename T>
ad::Var<T> discriminate_graph(const Model<T>& m, const Binding<T>& b, const ad::Var<T>& x) {
  check(m.role == Role::discriminator, "discriminate: wrong role");
  return m.net_forward(b, x);
}

template <typename T>
ad::Var<T> surrogate_graph(const Model<T>& m, const Binding<T>& b, const ad::Var<T>& x) {
  check(m.role == Role::surrogate, "surrogate_forward: wrong role");
  return ad::add(x, m.net_forward(b, x));
}

// ---------------------------------------------------------------------------
// public batch ops (inference; outputs clamped to the canonical range)

template <typename T>
std::vector<Image> embed(const Model<T>& m, const std::vector<Image>& covers,
                         const WatermarkAsset& wm) {
  check(!covers.empty(), "embed: empty batch");
  check(covers[0].h == wm.image.h && covers[0].w == wm.image.w,
        "embed: watermark size does not match covers");
  auto b = m.bind(false);
  auto cv = ad::constant(batch_to_tensor<T>(covers));
  auto wv = ad::constant(batch_to_tensor<T>(std::vector<Image>(covers.size(), wm.image)));
  auto out = embed_graph(m, b, cv, wv);
  return batch_from_tensor(out->val, true);
}

template <typename T>
std::vector<Image> retrieve(const Model<T>& m, const std::vector<Image>& batch) {
  check(!batch.empty(), "retrieve: empty batch");
  auto b = m.bind(false);
  auto out = retrieve_graph(m, b, ad::constant(batch_to_tensor<T>(batch)));
  return batch_from_tensor(out->val, true);
}

template <typename T>
Tensor<T> discriminate(const Model<T>& m, const std::vector<Image>& batch) {
  check(!batch.empty(), "discriminate: empty batch");
  auto b = m.bind(false);
  return discriminate_graph(m, b, ad::constant(batch_to_tensor<T>(batch)))->val;
}

template <typename T>
std::vector<Image> surrogate_forward(const Model<T>& m, const std::vector<Image>& batch) {
  check(!batch.empty(), "surrogate_forward: empty batch");
  auto b = m.bind(false);
  auto out = surrogate_graph(m, b, ad::constant(batch_to_tensor<T>(batch)));
  return batch_from_tensor(out->val, true);
}

// ---------------------------------------------------------------------------
// checkpoints: magic | version | header json | raw payload
// The header is readable without touching the payload.

namespace detail {

constexpr char kMagic[4] = {'W', 'M', 'L', 'B'};
constexpr uint32_t kVersion = 1;

inline uint64_t fnv1a(const void* data, size_t n) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  uint64_t h = 0xcbf29ce484222325ull;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

template <typename T>
constexpr const char* dtype_tag() {
  if constexpr (std::is_same_v<T, float>) return "f32";
  else return "f64";
}

}  // namespace detail

template <typename T>
nlohmann::json checkpoint_header(const Model<T>& m) {
  nlohmann::json j;
  j["role"] = role_name(m.role);
  j["arch"] = arch_name(m.arch);
  j["cfg"] = {{"in_ch", m.cfg.in_ch}, {"out_ch", m.cfg.out_ch}, {"base", m.cfg.base},
              {"blocks", m.cfg.blocks}};
  j["seed"] = m.seed;
  j["dtype"] = detail::dtype_tag<T>();
  j["meta"] = {{"stage", m.meta.stage}, {"epoch", m.meta.epoch}, {"seed", m.meta.seed},
               {"loss_weights", m.meta.loss_weights}};
  auto params = nlohmann::json::array();
  size_t payload = 0;
  for (const auto& p : m.store.params) {
    params.push_back({{"name", p.name},
                      {"shape", {p.value.n(), p.value.c(), p.value.h(), p.value.w()}}});
    payload += p.value.size() * sizeof(T);
  }
  j["params"] = params;
  j["payload_bytes"] = payload;
  return j;
}

template <typename T>
void save_bundle(const Model<T>& m, const std::string& path) {
  static_assert(std::endian::native == std::endian::little, "checkpoint format is little-endian");
  nlohmann::json hdr = checkpoint_header(m);
  std::vector<char> payload;
  payload.reserve(hdr["payload_bytes"].get<size_t>());
  for (const auto& p : m.store.params) {
    const char* raw = reinterpret_cast<const char*>(p.value.data());
    payload.insert(payload.end(), raw, raw + p.value.size() * sizeof(T));
  }
  hdr["payload_fnv"] = detail::fnv1a(payload.data(), payload.size());
  std::string hs = hdr.dump();

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  check(f.good(), "save_bundle: cannot write " + path);
  f.write(detail::kMagic, 4);
  uint32_t ver = detail::kVersion, hlen = static_cast<uint32_t>(hs.size());
  f.write(reinterpret_cast<const char*>(&ver), 4);
  f.write(reinterpret_cast<const char*>(&hlen), 4);
  f.write(hs.data(), hs.size());
  f.write(payload.data(), payload.size());
  check(f.good(), "save_bundle: write failed for " + path);
}

// Header only; cheap existence/identity probe.
inline nlohmann::json read_bundle_header(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  check(f.good(), "read_bundle_header: cannot open " + path);
  char magic[4];
  uint32_t ver = 0, hlen = 0;
  f.read(magic, 4);
  f.read(reinterpret_cast<char*>(&ver), 4);
  f.read(reinterpret_cast<char*>(&hlen), 4);
  check(f.good() && std::memcmp(magic, detail::kMagic, 4) == 0,
        "corrupt checkpoint (bad magic): " + path);
  check(ver == detail::kVersion,
        "checkpoint version mismatch in " + path + " (got " + std::to_string(ver) + ")");
  std::string hs(hlen, '\0');
  f.read(hs.data(), hlen);
  check(f.good(), "corrupt checkpoint (truncated header): " + path);
  return nlohmann::json::parse(hs);
}

template <typename T>
Model<T> load_bundle(const std::string& path, std::optional<Role> expected_role = std::nullopt) {
  nlohmann::json hdr = read_bundle_header(path);
  check(hdr["dtype"] == detail::dtype_tag<T>(),
        "checkpoint dtype mismatch in " + path + " (stored " +
            hdr["dtype"].get<std::string>() + ")");
  Role role = parse_role(hdr["role"].get<std::string>());
  if (expected_role && role != *expected_role)
    throw std::runtime_error("role mismatch: " + path + " holds a " +
                             std::string(role_name(role)) + ", expected " +
                             role_name(*expected_role));
  ArchConfig cfg;
  cfg.in_ch = hdr["cfg"]["in_ch"];
  cfg.out_ch = hdr["cfg"]["out_ch"];
  cfg.base = hdr["cfg"]["base"];
  cfg.blocks = hdr["cfg"]["blocks"];
  Model<T> m = make_model<T>(role, parse_arch(hdr["arch"].get<std::string>()), cfg,
                             hdr["seed"].get<uint64_t>());
  m.meta.stage = hdr["meta"]["stage"].get<std::string>();
  m.meta.epoch = hdr["meta"]["epoch"];
  m.meta.seed = hdr["meta"]["seed"];
  m.meta.loss_weights = hdr["meta"]["loss_weights"].get<std::string>();

  check(hdr["params"].size() == m.store.count(), "corrupt checkpoint (param list): " + path);
  std::ifstream f(path, std::ios::binary);
  f.seekg(8, std::ios::beg);
  uint32_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), 4);
  f.seekg(12 + static_cast<std::streamoff>(hlen), std::ios::beg);
  std::vector<char> payload(hdr["payload_bytes"].get<size_t>());
  f.read(payload.data(), payload.size());
  check(f.good() && f.gcount() == static_cast<std::streamsize>(payload.size()),
        "corrupt checkpoint (truncated payload): " + path);
  check(detail::fnv1a(payload.data(), payload.size()) == hdr["payload_fnv"].get<uint64_t>(),
        "corrupt checkpoint (checksum): " + path);

  size_t off = 0;
  for (size_t i = 0; i < m.store.count(); ++i) {
    auto& p = m.store.params[i];
    const auto& shp = hdr["params"][i]["shape"];
    check(shp[0] == p.value.n() && shp[1] == p.value.c() && shp[2] == p.value.h() &&
              shp[3] == p.value.w(),
          "checkpoint shape mismatch for " + p.name + " in " + path);
    std::memcpy(p.value.data(), payload.data() + off, p.value.size() * sizeof(T));
    off += p.value.size() * sizeof(T);
  }
  return m;
}

}  // namespace wmlab::nn
