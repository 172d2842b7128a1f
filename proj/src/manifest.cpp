#include "condmix/manifest.hpp"

#include "condmix/util.hpp"
#include "condmix/version.hpp"

namespace condmix {

RunManifest::RunManifest(const std::string& command) {
  doc_["tool"] = kToolName;
  doc_["version"] = kToolVersion;
  doc_["command"] = command;
  doc_["inputs"] = nlohmann::json::object();
  doc_["params"] = nlohmann::json::object();
}

void RunManifest::add_input(const std::string& role, const std::string& path,
                            const std::string& content) {
  doc_["inputs"][role] = {{"path", path}, {"digest", hex64(fnv1a64(content))}};
}

void RunManifest::set_param(const std::string& key, const nlohmann::json& value) {
  doc_["params"][key] = value;
}

std::string RunManifest::digest() const { return hex64(fnv1a64(doc_.dump())); }

std::string RunManifest::digest_comment() const { return "# manifest: " + digest(); }

std::string RunManifest::dump() const { return doc_.dump(2) + "\n"; }

}  // namespace condmix
