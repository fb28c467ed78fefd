#include "manifest.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "giantpair/error.hpp"

namespace giantpair::cli {

namespace fs = std::filesystem;
using nlohmann::json;

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(fmt::format("cannot read {}", path.string()));
    const std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw Error("sha256 init failed");
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
    std::string hex;
    for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
    return hex;
}

std::vector<ManifestEntry> scan_outputs(const fs::path& dir) {
    std::vector<ManifestEntry> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto rel = fs::relative(e.path(), dir).generic_string();
        if (rel == manifest_name) continue;
        out.push_back({rel, sha256_file(e.path()), e.file_size()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    return out;
}

void write_manifest(const fs::path& dir, const json& config) {
    json files = json::array();
    for (const auto& f : scan_outputs(dir)) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    const json doc{{"schema_version", 1}, {"config", config}, {"files", files}};
    std::ofstream out(dir / manifest_name, std::ios::binary);
    if (!out) throw Error(fmt::format("cannot write {}", (dir / manifest_name).string()));
    out << doc.dump(2) << '\n';
}

void prepare_output_dir(const fs::path& dir) {
    if (fs::exists(dir) && !fs::is_directory(dir))
        throw ConfigError(fmt::format("output path '{}' is not a directory", dir.string()));
    fs::create_directories(dir);
    const auto previous = dir / manifest_name;
    if (fs::exists(previous)) {
        json doc;
        try {
            std::ifstream in(previous);
            doc = json::parse(in);
        } catch (const json::exception&) {
            throw ConfigError(fmt::format("'{}' is not a readable manifest", previous.string()));
        }
        for (const auto& f : doc.value("files", json::array())) {
            const fs::path rel = f.at("path").get<std::string>();
            if (rel.is_absolute() || std::any_of(rel.begin(), rel.end(), [](const fs::path& c) { return c == ".."; }))
                throw ConfigError(fmt::format("'{}' lists a path outside its directory", previous.string()));
            const fs::path p = dir / rel;
            fs::remove(p);
            for (auto parent = p.parent_path(); parent != dir && fs::exists(parent) && fs::is_empty(parent); parent = parent.parent_path())
                fs::remove(parent);
        }
        fs::remove(previous);
    }
    if (!fs::is_empty(dir))
        throw ConfigError(fmt::format("output directory '{}' holds files from elsewhere", dir.string()));
}

}  // namespace giantpair::cli
