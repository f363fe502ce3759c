#include "mlcslm/adapters.hpp"

#include <cmath>

#include "mlcslm/error.hpp"
#include "mlcslm/io.hpp"

namespace mlcslm {

namespace fs = std::filesystem;

void AdapterRegistry::add(AdapterBundle bundle) {
  const LanguageId lang = bundle.language;
  if (!bundles_.emplace(lang, std::move(bundle)).second)
    throw Error("duplicate adapter bundle for language '" + lang.str() + "'");
}

const AdapterBundle* AdapterRegistry::find(const LanguageId& lang) const {
  const auto it = bundles_.find(lang);
  return it == bundles_.end() ? nullptr : &it->second;
}

std::vector<LanguageId> AdapterRegistry::languages() const {
  std::vector<LanguageId> out;
  for (const auto& [lang, _] : bundles_) out.push_back(lang);
  return out;
}

const AdapterBundle& route(const AdapterRegistry& registry, const LanguageId& lang,
                           const AdapterBundle* fallback) {
  if (registry.empty()) throw Error("adapter registry is empty");
  if (const auto* b = registry.find(lang)) return *b;
  if (fallback) return *fallback;
  throw Error("no adapter bundle for language '" + lang.str() + "' and no fallback");
}

fs::path sidecar_path(const fs::path& archive) {
  fs::path p = archive;
  return p.replace_extension(".json");
}

ParamFile read_param_file(const fs::path& archive_path) {
  const EmbeddingArchive archive = read_embeddings(read_file(archive_path));
  ParamFile out;
  try {
    out.meta = nlohmann::json::parse(read_file(sidecar_path(archive_path)));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad sidecar for " + archive_path.string() + ": " + e.what());
  }
  if (!out.meta.contains("tensors") || !out.meta["tensors"].is_object())
    throw FormatError("sidecar for " + archive_path.string() + " lacks a \"tensors\" object");
  const std::size_t chunk = archive.dim();
  for (const auto& [name, shape] : out.meta["tensors"].items()) {
    if (!shape.is_array() || shape.size() != 2 || !shape[0].is_number_unsigned() ||
        !shape[1].is_number_unsigned())
      throw FormatError("tensor '" + name + "' needs a [rows, cols] shape");
    const auto rows = shape[0].get<std::size_t>(), cols = shape[1].get<std::size_t>();
    Mat m(rows, cols);
    const std::size_t total = rows * cols;
    for (std::size_t c = 0; c * chunk < total; ++c) {
      const auto* vec = archive.find(name + "/" + std::to_string(c));
      if (!vec) throw FormatError("tensor '" + name + "' is missing chunk " + std::to_string(c));
      for (std::size_t k = 0; k < chunk && c * chunk + k < total; ++k) {
        const std::size_t flat = c * chunk + k;
        m(static_cast<Eigen::Index>(flat / cols), static_cast<Eigen::Index>(flat % cols)) = (*vec)[k];
      }
    }
    out.tensors.emplace(name, std::move(m));
  }
  return out;
}

void write_param_file(const fs::path& archive_path, const TensorMap& tensors,
                      nlohmann::json meta, std::uint32_t chunk) {
  EmbeddingArchive archive(chunk);
  meta["tensors"] = nlohmann::json::object();
  for (const auto& [name, m] : tensors) {
    meta["tensors"][name] = {m.rows(), m.cols()};
    const std::size_t total = static_cast<std::size_t>(m.size()), cols = static_cast<std::size_t>(m.cols());
    for (std::size_t c = 0; c * chunk < total; ++c) {
      std::vector<float> vec(chunk, 0.0f);
      for (std::size_t k = 0; k < chunk && c * chunk + k < total; ++k) {
        const std::size_t flat = c * chunk + k;
        vec[k] = static_cast<float>(m(static_cast<Eigen::Index>(flat / cols),
                                      static_cast<Eigen::Index>(flat % cols)));
      }
      archive.add(name + "/" + std::to_string(c), std::move(vec));
    }
  }
  write_file(archive_path, write_embeddings(archive));
  write_file(sidecar_path(archive_path), meta.dump(2) + "\n");
}

namespace {

const Mat& tensor(const TensorMap& t, const std::string& name) {
  const auto it = t.find(name);
  if (it == t.end()) throw FormatError("missing tensor '" + name + "'");
  return it->second;
}

Vec column(const Mat& m, const std::string& name) {
  if (m.cols() != 1) throw FormatError("tensor '" + name + "' must be a column vector");
  return m.col(0);
}

}  // namespace

FusionParams fusion_params_from(const TensorMap& t) {
  FusionParams p;
  p.w_q = tensor(t, "W_q");
  p.w_k = tensor(t, "W_k");
  p.w_v = tensor(t, "W_v");
  p.w_g = column(tensor(t, "w_g"), "w_g");
  const Mat& b = tensor(t, "b_g");
  if (b.size() != 1) throw FormatError("tensor 'b_g' must be 1x1");
  p.b_g = b(0, 0);
  p.validate();
  return p;
}

AdapterBundle bundle_from(const ParamFile& file, LanguageId language) {
  AdapterBundle b{std::move(language), 1, {}, {}, {}};
  const auto& meta = file.meta;
  try {
    const auto& ad = meta.at("adapter");
    b.stack = ad.value("stack", std::size_t{1});
    const std::string act = ad.value("activation", std::string("relu"));
    if (act == "relu") b.adapter.activation = Activation::kRelu;
    else if (act == "gelu-tanh") b.adapter.activation = Activation::kGeluTanh;
    else throw FormatError("unknown activation '" + act + "'");
    b.adapter.w1 = tensor(file.tensors, "adapter.W1");
    b.adapter.b1 = column(tensor(file.tensors, "adapter.b1"), "adapter.b1");
    b.adapter.w2 = tensor(file.tensors, "adapter.W2");
    b.adapter.b2 = column(tensor(file.tensors, "adapter.b2"), "adapter.b2");
    if (meta.contains("loras"))
      for (const auto& l : meta.at("loras")) {
        const std::string target = l.at("target").get<std::string>();
        LoraDelta d;
        d.a = tensor(file.tensors, "lora." + target + ".A");
        d.b = tensor(file.tensors, "lora." + target + ".B");
        d.alpha = l.at("alpha").get<double>();
        d.validate();
        b.loras.emplace_back(target, std::move(d));
      }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad bundle metadata: ") + e.what());
  }
  if (b.stack < 1) throw FormatError("adapter stack must be >= 1");
  return b;
}

ParamFile bundle_to_param_file(const AdapterBundle& b) {
  ParamFile f;
  f.tensors["adapter.W1"] = b.adapter.w1;
  f.tensors["adapter.b1"] = b.adapter.b1;
  f.tensors["adapter.W2"] = b.adapter.w2;
  f.tensors["adapter.b2"] = b.adapter.b2;
  f.meta["adapter"] = {{"stack", b.stack},
                       {"activation", b.adapter.activation == Activation::kRelu ? "relu" : "gelu-tanh"}};
  f.meta["loras"] = nlohmann::json::array();
  for (const auto& [target, d] : b.loras) {
    f.tensors["lora." + target + ".A"] = d.a;
    f.tensors["lora." + target + ".B"] = d.b;
    f.meta["loras"].push_back({{"target", target}, {"alpha", d.alpha}});
  }
  return f;
}

RegistryIndex read_registry_index(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad registry " + path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const fs::path q(p);
    return (q.is_absolute() ? q : base / q).lexically_normal();
  };
  RegistryIndex idx;
  if (!doc.is_object() || !doc.contains("bundles") || !doc["bundles"].is_object())
    throw FormatError("registry " + path.string() + " needs a \"bundles\" object");
  for (const auto& [lang, p] : doc["bundles"].items()) {
    if (lang.empty() || !p.is_string()) throw FormatError("bad registry entry '" + lang + "'");
    idx.bundles.emplace(lang, resolve(p.get<std::string>()));
  }
  if (doc.contains("fallback")) {
    if (!doc["fallback"].is_string()) throw FormatError("\"fallback\" must be a path");
    idx.fallback = resolve(doc["fallback"].get<std::string>());
  }
  return idx;
}

LoadedRegistry load_registry(const fs::path& path) {
  const RegistryIndex idx = read_registry_index(path);
  LoadedRegistry out;
  for (const auto& [lang, p] : idx.bundles) {
    AdapterBundle b = bundle_from(read_param_file(p), LanguageId(lang));
    b.source = p.string();
    out.registry.add(std::move(b));
  }
  if (idx.fallback) {
    AdapterBundle b = bundle_from(read_param_file(*idx.fallback), LanguageId("fallback"));
    b.source = idx.fallback->string();
    out.fallback = std::move(b);
  }
  return out;
}

}  // namespace mlcslm
