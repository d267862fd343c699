#pragma once

#include "infrasim/network.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace infrasim
{
    inline constexpr int kNetworkSchemaVersion = 1;

    /// Serializes to the canonical JSON text (sorted keys, two-space indent,
    /// trailing newline). Loading that text and saving again is the identity.
    std::string network_to_json(IntegratedNetwork const& net);

    /// Parses and validates. Throws ParseError (with line or field path) or
    /// ValidationError (listing each violated invariant).
    IntegratedNetwork network_from_json(std::string_view text);

    IntegratedNetwork load_network(std::filesystem::path const& path);
    void save_network(
        IntegratedNetwork const& net, std::filesystem::path const& path);

    std::string read_text_file(std::filesystem::path const& path);
    void write_text_file(
        std::filesystem::path const& path, std::string_view text);
}
