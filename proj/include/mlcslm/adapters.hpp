#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mlcslm/fusion.hpp"
#include "mlcslm/types.hpp"

namespace mlcslm {

// Per-language trainable parameters: the adapter and the LoRA deltas for
// named targets inside the language model.
struct AdapterBundle {
  LanguageId language;
  std::size_t stack = 1;
  AdapterParams adapter;
  std::vector<std::pair<std::string, LoraDelta>> loras;
  std::string source;  // parameter file it was loaded from, if any
};

class AdapterRegistry {
 public:
  // Throws on a second bundle for the same language.
  void add(AdapterBundle bundle);
  const AdapterBundle* find(const LanguageId& lang) const;
  std::size_t size() const { return bundles_.size(); }
  bool empty() const { return bundles_.empty(); }
  std::vector<LanguageId> languages() const;

 private:
  std::map<LanguageId, AdapterBundle> bundles_;
};

// Exact-match lookup, else `fallback` (the shared base bundle), else error.
const AdapterBundle& route(const AdapterRegistry& registry, const LanguageId& lang,
                           const AdapterBundle* fallback = nullptr);

// Parameter files reuse the EMB1 archive: each named tensor is flattened
// row-major into chunks of the archive dimension stored under
// "<name>/<chunk>", the last chunk zero-padded. A JSON sidecar next to the
// archive (same stem, ".json") records {"tensors": {name: [rows, cols]}}
// plus bundle metadata ("adapter": {"stack", "activation"}, "loras":
// [{"target", "alpha"}]).
using TensorMap = std::map<std::string, Mat>;

struct ParamFile {
  TensorMap tensors;
  nlohmann::json meta;  // the sidecar, including "tensors"
};

std::filesystem::path sidecar_path(const std::filesystem::path& archive);
ParamFile read_param_file(const std::filesystem::path& archive);
void write_param_file(const std::filesystem::path& archive, const TensorMap& tensors,
                      nlohmann::json meta, std::uint32_t chunk = 64);

// Reserved names: W_q, W_k, W_v, w_g (d_s x 1), b_g (1 x 1).
FusionParams fusion_params_from(const TensorMap& tensors);
// Reserved names: adapter.W1, adapter.b1, adapter.W2, adapter.b2,
// lora.<target>.A, lora.<target>.B.
AdapterBundle bundle_from(const ParamFile& file, LanguageId language);
ParamFile bundle_to_param_file(const AdapterBundle& bundle);

struct LoadedRegistry {
  AdapterRegistry registry;
  std::optional<AdapterBundle> fallback;
};

// Registry manifest: {"bundles": {"<language>": "<param file>", ...},
// "fallback": "<param file>"} with paths relative to the manifest.
LoadedRegistry load_registry(const std::filesystem::path& path);

// Reads only the manifest: language -> resolved parameter path, plus the
// fallback path. Used for configuration checks.
struct RegistryIndex {
  std::map<std::string, std::filesystem::path> bundles;
  std::optional<std::filesystem::path> fallback;
};
RegistryIndex read_registry_index(const std::filesystem::path& path);

}  // namespace mlcslm
