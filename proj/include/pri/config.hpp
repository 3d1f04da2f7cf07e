#pragma once

// Key-value configuration files with includes, mapped onto campaign,
// engine, script and detector settings.

#include <cstddef>
#include <string>
#include <vector>

#include "pri/runner.hpp"

namespace pri {

struct ConfigEntry {
    std::string key;
    std::string value;
    std::string origin;  // "file:line" or "flag"
};

// "key = value" lines, '#' comments, and "include <path>" resolved relative
// to the including file. Entries keep file order; later entries win.
std::vector<ConfigEntry> parse_config_file(const std::string& path);
std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& origin_name,
                                           const std::string& base_dir = ".");

// Applies one setting; throws ValidationError naming the key and origin.
void apply_setting(CampaignConfig& config, const ConfigEntry& entry);
CampaignConfig campaign_from_entries(const std::vector<ConfigEntry>& entries);

// Every key apply_setting accepts ("engine.prior" etc.), for help output.
const std::vector<std::string>& known_config_keys();

}  // namespace pri
