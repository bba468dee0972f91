#include "ibsignal/checkpoint.hpp"

#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "ibsignal/csvio.hpp"
#include "ibsignal/errors.hpp"

namespace ibsignal {

namespace {

constexpr const char* kMagic = "ibsignal-checkpoint 1";

std::vector<int> hidden_widths(const Mlp& encoder) {
    std::vector<int> hidden;
    for (size_t l = 0; l + 1 < encoder.weights.size(); ++l)
        hidden.push_back(encoder.weights[l].rows());
    return hidden;
}

std::string next_line(std::ifstream& in, const std::string& path, long& line) {
    std::string raw;
    if (!std::getline(in, raw)) throw ParseError(path, line + 1, "unexpected end of file");
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    return raw;
}

std::string expect_key(const std::string& raw, const std::string& key, const std::string& path,
                       long line) {
    if (raw.rfind(key + " ", 0) != 0)
        throw ParseError(path, line, "expected '" + key + " ...'");
    return raw.substr(key.size() + 1);
}

}  // namespace

void save_checkpoint(const std::string& path, const Agents& agents) {
    Agents copy = agents;
    std::vector<std::pair<std::string, Tensor*>> named;
    copy.collect_params(named);

    std::string out = std::string(kMagic) + "\n";
    out += "kind " + speaker_kind_name(copy.speaker.kind) + "\n";
    out += "comm_dim " + std::to_string(copy.speaker.comm_dim()) + "\n";
    out += "signals " + std::to_string(copy.speaker.signal_count()) + "\n";
    const std::vector<int> hidden = hidden_widths(copy.speaker.encoder);
    out += "hidden ";
    if (hidden.empty()) {
        out += "-";
    } else {
        for (size_t i = 0; i < hidden.size(); ++i) {
            if (i) out += ",";
            out += std::to_string(hidden[i]);
        }
    }
    out += "\n";
    out += "params " + std::to_string(named.size()) + "\n";
    for (const auto& [name, tensor] : named) {
        out += "param " + name + " " + std::to_string(tensor->shape.size());
        for (int d : tensor->shape) out += " " + std::to_string(d);
        out += "\n";
        for (size_t i = 0; i < tensor->data.size(); ++i) {
            if (i) out += " ";
            out += format_double(tensor->data[i]);
        }
        out += "\n";
    }
    write_text_file(path, out);
}

Agents load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open checkpoint: " + path);
    long line = 0;

    if (next_line(in, path, line) != kMagic)
        throw ParseError(path, line, "not an agent checkpoint");

    AgentConfig config;
    try {
        config.kind = parse_speaker_kind(expect_key(next_line(in, path, line), "kind", path, line));
    } catch (const std::invalid_argument& e) {
        throw ParseError(path, line, e.what());
    }
    config.comm_dim = static_cast<int>(
        parse_long(expect_key(next_line(in, path, line), "comm_dim", path, line), path, line));
    config.codebook_size = static_cast<int>(
        parse_long(expect_key(next_line(in, path, line), "signals", path, line), path, line));
    const std::string hidden = expect_key(next_line(in, path, line), "hidden", path, line);
    config.hidden.clear();
    if (hidden != "-")
        for (const std::string& field : split_fields(hidden, ','))
            config.hidden.push_back(static_cast<int>(parse_long(field, path, line)));

    const long param_count =
        parse_long(expect_key(next_line(in, path, line), "params", path, line), path, line);

    RandomSource rng(0, 0);
    Agents agents = Agents::init(config, rng);
    std::vector<std::pair<std::string, Tensor*>> named;
    agents.collect_params(named);
    std::map<std::string, Tensor*> by_name;
    for (auto& [name, tensor] : named) by_name[name] = tensor;
    if (param_count != static_cast<long>(by_name.size()))
        throw ParseError(path, line, "checkpoint declares " + std::to_string(param_count) +
                                         " params, architecture has " +
                                         std::to_string(by_name.size()));

    for (long p = 0; p < param_count; ++p) {
        const std::string head = next_line(in, path, line);
        const std::vector<std::string> fields = split_fields(head, ' ');
        if (fields.size() < 3 || fields[0] != "param")
            throw ParseError(path, line, "expected 'param <name> <rank> <dims...>'");
        const auto it = by_name.find(fields[1]);
        if (it == by_name.end())
            throw ParseError(path, line, "unknown parameter '" + fields[1] + "'");
        const long rank = parse_long(fields[2], path, line);
        if (static_cast<long>(fields.size()) != 3 + rank)
            throw ParseError(path, line, "parameter rank does not match dims");
        std::vector<int> shape;
        for (long d = 0; d < rank; ++d)
            shape.push_back(static_cast<int>(parse_long(fields[static_cast<size_t>(3 + d)], path, line)));
        if (shape != it->second->shape)
            throw ParseError(path, line, "shape mismatch for '" + fields[1] + "'");

        const std::string values = next_line(in, path, line);
        const std::vector<std::string> parts = split_fields(values, ' ');
        if (parts.size() != it->second->data.size())
            throw ParseError(path, line, "wrong value count for '" + fields[1] + "'");
        for (size_t i = 0; i < parts.size(); ++i)
            it->second->data[i] = parse_double(parts[i], path, line);
        by_name.erase(it);
    }
    if (!by_name.empty())
        throw ParseError(path, line, "missing parameter '" + by_name.begin()->first + "'");
    return agents;
}

}  // namespace ibsignal
