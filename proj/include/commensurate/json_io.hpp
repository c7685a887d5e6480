#pragma once

// JSON and CSV serialization for the CLI: coset tables, virtual
// automorphisms, representations, boundary samples. Every output document
// carries a provenance header (schema version, command, config hash, seed)
// so identical configurations reproduce byte-identical files.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "commensurate/boundary.hpp"
#include "commensurate/vaut.hpp"

namespace commensurate {

using nlohmann::json;

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline json provenance(const std::string& command, const std::string& config_line, std::uint64_t seed) {
    json j;
    j["schema_version"] = 1;
    j["tool"] = "commensurate";
    j["command"] = command;
    j["config_hash"] = fnv1a(config_line);
    j["seed"] = seed;
    return j;
}

inline json to_json(const CosetTable& t) {
    json j;
    j["degree"] = t.degree();
    j["genus"] = t.genus();
    j["perms"] = t.perms();
    j["normal"] = t.is_normal();
    j["derived_genus"] = t.derived_genus();
    return j;
}

inline CosetTable coset_table_from_json(const json& j) {
    SurfaceGroupPresentation p(j.at("genus").get<int>());
    std::vector<std::vector<int>> fwd = j.at("perms").get<std::vector<std::vector<int>>>();
    return CosetTable::from_perms(p, fwd, 0);
}

inline json to_json(const VirtualAutomorphism& v) {
    json j;
    j["genus"] = v.presentation().genus;
    j["ambient_table"] = to_json(v.ambient());
    j["domain_table"] = to_json(v.domain());
    j["codomain_table"] = to_json(v.codomain());
    json images = json::array();
    for (const Word& w : v.images()) images.push_back(to_string(w));
    j["images"] = images;
    json inv = json::array();
    for (const Word& w : v.inverse_images()) inv.push_back(to_string(w));
    j["inverse_images"] = inv;
    if (v.conjugator()) j["conjugator"] = to_string(*v.conjugator());
    j["orientation"] = v.orientation();
    return j;
}

inline VirtualAutomorphism vaut_from_json(const json& j) {
    SurfaceGroupPresentation p(j.at("genus").get<int>());
    CosetTable ambient = coset_table_from_json(j.at("ambient_table"));
    CosetTable domain = coset_table_from_json(j.at("domain_table"));
    CosetTable codomain = coset_table_from_json(j.at("codomain_table"));
    std::vector<Word> images, inverse_images;
    for (const auto& s : j.at("images")) images.push_back(parse_word(s.get<std::string>()));
    for (const auto& s : j.at("inverse_images")) inverse_images.push_back(parse_word(s.get<std::string>()));
    std::optional<Word> conj;
    if (j.contains("conjugator")) conj = parse_word(j.at("conjugator").get<std::string>());
    VirtualAutomorphism v =
        VirtualAutomorphism::from_parts(p, ambient, domain, codomain, images, inverse_images, conj);
    v.verify();
    if (j.contains("orientation")) v.set_orientation(j.at("orientation").get<int>());
    return v;
}

inline json to_json(const MoebiusMap& m) { return json::array({m.a, m.b, m.c, m.d}); }

inline MoebiusMap moebius_from_json(const json& j) {
    return MoebiusMap(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                      j.at(3).get<double>());
}

inline json to_json(const FuchsianRep& r) {
    json j;
    j["num_gens"] = r.pres.num_gens;
    json rels = json::array();
    for (const Word& w : r.pres.relators) {
        json letters = json::array();
        for (Letter x : w.letters) letters.push_back(x);
        rels.push_back(letters);
    }
    j["relators"] = rels;
    json gens = json::array();
    for (const auto& g : r.gens) gens.push_back(to_json(g));
    j["matrices"] = gens;
    j["normalized"] = r.normalized;
    j["relation_residual"] = r.relation_residual();
    return j;
}

inline FuchsianRep rep_from_json(const json& j) {
    FuchsianRep r;
    r.pres.num_gens = j.at("num_gens").get<int>();
    for (const auto& rel : j.at("relators")) {
        std::vector<Letter> ls;
        for (const auto& x : rel) ls.push_back(x.get<int>());
        r.pres.relators.push_back(freely_reduce(ls));
    }
    for (const auto& g : j.at("matrices")) r.gens.push_back(moebius_from_json(g));
    if (j.contains("normalized")) r.normalized = j.at("normalized").get<bool>();
    return r;
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw InvariantError("cannot open output file " + path);
    out << j.dump(2) << "\n";
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvariantError("cannot open input file " + path);
    json j;
    in >> j;
    return j;
}

inline void write_sample_csv(const std::string& path, const CircleMapSample& s, const json& header) {
    std::ofstream out(path);
    if (!out) throw InvariantError("cannot open output file " + path);
    out << "# " << header.dump() << "\n";
    out << "source_angle,target_angle,word\n";
    out.precision(17);
    for (const auto& pr : s.pairs)
        out << pr.source << "," << pr.target << "," << to_string(pr.word) << "\n";
}

}  // namespace commensurate
