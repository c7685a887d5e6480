// Batch front-end for the limit-construction toolkit. One experiment per
// invocation; JSON/CSV outputs carry provenance headers (config hash, seed)
// so identical configurations produce byte-identical files.
//
// Exit codes: 0 pass, 1 configuration error, 2 property failure,
// 3 resource cap exceeded.

#include <iostream>

#include <CLI11.hpp>

#include "commensurate/forms.hpp"
#include "commensurate/iv4.hpp"
#include "commensurate/json_io.hpp"
#include "commensurate/solenoid.hpp"

using namespace commensurate;

namespace {

int run_subgroups(int genus, int max_index, const std::string& out, std::uint64_t seed) {
    SurfaceGroupPresentation p(genus);
    auto subs = enumerate_subgroups(p, max_index);
    json doc;
    doc["provenance"] = provenance("subgroups",
                                   "genus=" + std::to_string(genus) +
                                       " max_index=" + std::to_string(max_index),
                                   seed);
    json list = json::array();
    for (const auto& t : subs) list.push_back(to_json(t));
    doc["count"] = subs.size();
    doc["subgroups"] = list;
    if (out.empty())
        std::cout << doc.dump(2) << "\n";
    else
        write_json(out, doc);
    return 0;
}

int run_iv4(int genus, const std::string& out, std::uint64_t seed) {
    SurfaceGroupPresentation p(genus);
    FinitePermGroup s3 = FinitePermGroup::symmetric(3);
    Iv4Result res = construct_iv4(p, s3, {parse_perm("(0 1)", 3)}, parse_perm("(1 2)", 3));
    json doc;
    doc["provenance"] = provenance("iv4", "genus=" + std::to_string(genus), seed);
    doc["vaut"] = to_json(res.vaut);
    doc["certificate"] = {{"g_p", to_json(res.certificate.g_p)},
                          {"g_q", to_json(res.certificate.g_q)},
                          {"conjugating_word", to_string(res.certificate.conjugating_word)},
                          {"normalizing", res.certificate.normalizing}};
    if (out.empty())
        std::cout << doc.dump(2) << "\n";
    else
        write_json(out, doc);
    return 0;
}

VirtualAutomorphism iv4_lifted_to_genus3(const SurfaceGroupPresentation& p, CosetTable* ambient_out) {
    FinitePermGroup s3 = FinitePermGroup::symmetric(3);
    Iv4Result iv4 = construct_iv4(p, s3, {parse_perm("(0 1)", 3)}, parse_perm("(1 2)", 3));
    CosetTable h;
    bool found = false;
    for (const auto& t : enumerate_subgroups(p, 2)) {
        if (t.degree() == 2 && !t.membership(iv4.certificate.conjugating_word)) {
            h = t;
            found = true;
            break;
        }
    }
    if (!found) throw NumericError("iv4 lift: no index-2 subgroup avoiding the conjugating word");
    CosetTable m = intersect(h, iv4.certificate.g_p);
    CosetTable d = intersect(m, conjugate_table(m, inverse(iv4.certificate.conjugating_word)));
    if (ambient_out) *ambient_out = h;
    return VirtualAutomorphism::from_conjugation(p, h, d, iv4.certificate.conjugating_word);
}

int run_effectiveness(int genus, const std::string& out, std::uint64_t seed) {
    if (genus == 2) {
        std::cerr << "effectiveness: genus-2 actions are non-effective (hyperelliptic involution); "
                     "request rejected\n";
        return 1;
    }
    if (genus != 3) {
        std::cerr << "effectiveness: only the genus-3 lift of the built-in element is wired up\n";
        return 1;
    }
    SurfaceGroupPresentation p(2);
    FundamentalPolygon poly = polygon_group(2);
    CosetTable ambient;
    VirtualAutomorphism v = iv4_lifted_to_genus3(p, &ambient);
    EffectivenessOptions opts;
    opts.seed = seed;
    EffectivenessWitness w = effectiveness_experiment(v, poly, opts);
    json doc;
    doc["provenance"] = provenance("effectiveness", "genus=3", seed);
    doc["trace_gap"] = w.trace_gap;
    doc["residual"] = w.residual;
    doc["h1"] = to_string(w.h1);
    doc["attempts"] = w.attempts_used;
    doc["rep"] = to_json(w.rep);
    if (out.empty())
        std::cout << doc.dump(2) << "\n";
    else
        write_json(out, doc);
    return w.trace_gap > opts.delta ? 0 : 2;
}

int run_stabilizer_check(int genus, std::uint64_t seed) {
    FundamentalPolygon poly = polygon_group(genus);
    MoebiusMap rot = to_half_plane(DiskMap::rotation(2 * M_PI / (4 * genus)));
    VirtualAutomorphism v = vaut_from_moebius(rot, poly, 3);
    TeichPoint base = base_point(poly);
    TeichPoint moved = modular_action(v, base);
    bool fixed = points_equal(moved, base, 1e-6);
    json doc;
    doc["provenance"] = provenance("stabilizer-check", "genus=" + std::to_string(genus), seed);
    doc["fixes_base_point"] = fixed;
    doc["domain_index"] = v.domain().degree();
    std::cout << doc.dump(2) << "\n";
    return fixed ? 0 : 2;
}

int run_comm_certify(int genus, int depth, const std::string& gamma_kind, const std::string& word_text,
                     const std::string& matrix_text, std::uint64_t seed) {
    FundamentalPolygon poly = polygon_group(genus);
    MoebiusMap gamma;
    if (gamma_kind == "rotation") {
        gamma = to_half_plane(DiskMap::rotation(2 * M_PI / (4 * genus)));
    } else if (gamma_kind == "word") {
        gamma = poly.rep.eval(parse_word(word_text));
    } else if (gamma_kind == "matrix") {
        std::stringstream ss(matrix_text);
        double e[4];
        char comma;
        ss >> e[0] >> comma >> e[1] >> comma >> e[2] >> comma >> e[3];
        if (!ss) throw InvariantError("comm-certify: matrix must be a,b,c,d");
        gamma = MoebiusMap(e[0], e[1], e[2], e[3]);
    } else {
        throw InvariantError("comm-certify: choose --rotation, --word or --matrix");
    }
    CommCertificate cert = commensurator_certificate(gamma, poly, depth);
    json doc;
    doc["provenance"] = provenance("comm-certify", gamma_kind + " depth=" + std::to_string(depth), seed);
    doc["status"] = cert.status == CommCertificate::Status::SUCCESS ? "SUCCESS" : "UNKNOWN";
    doc["depth"] = cert.depth;
    doc["collected"] = cert.collected;
    doc["index_domain"] = cert.index_domain;
    doc["index_image"] = cert.index_image;
    if (cert.gamma_order) doc["gamma_order_mod_group"] = *cert.gamma_order;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_fricke_solve(int genus, std::uint64_t seed, const std::string& out,
                     const std::string& trace_csv) {
    if (genus < 3) {
        std::cerr << "fricke solve: the completion step needs genus >= 3\n";
        return 1;
    }
    SurfaceGroupPresentation p(genus);
    FundamentalPolygon poly = polygon_group(genus);
    std::vector<MoebiusMap> partial(poly.rep.gens.begin(), poly.rep.gens.begin() + (2 * genus - 3));
    SolveOptions opts;
    opts.seed = seed;
    FuchsianRep rep = solve_normalized_rep(p, partial, opts);
    json doc;
    doc["provenance"] = provenance("fricke-solve", "genus=" + std::to_string(genus), seed);
    doc["rep"] = to_json(rep);
    if (!trace_csv.empty()) {
        TeichPoint pt = make_teich_point(CosetTable::whole_group(p), rep);
        std::vector<double> tc = trace_coordinates(pt);
        std::ofstream f(trace_csv);
        f << "# " << doc["provenance"].dump() << "\n";
        f.precision(17);
        for (size_t i = 0; i < tc.size(); ++i) f << (i ? "," : "") << tc[i];
        f << "\n";
    }
    if (out.empty())
        std::cout << doc.dump(2) << "\n";
    else
        write_json(out, doc);
    return 0;
}

int run_boundary_sample(const std::string& vaut_file, const std::string& rep_file, int budget,
                        const std::string& out, std::uint64_t seed) {
    json vj = read_json(vaut_file);
    VirtualAutomorphism v = vaut_from_json(vj.contains("vaut") ? vj["vaut"] : vj);
    SurfaceGroupPresentation p = v.presentation();
    FundamentalPolygon poly = polygon_group(p.genus);
    TeichPoint point = base_point(poly);
    if (!rep_file.empty()) {
        json rj = read_json(rep_file);
        FuchsianRep rep = rep_from_json(rj.contains("rep") ? rj["rep"] : rj);
        point = make_teich_point(v.ambient(), rep);
    } else if (v.ambient().degree() != 1) {
        point = restrict_point(point, v.ambient());
    }
    BoundarySampleOptions opts;
    opts.schreier_budget = budget;
    CircleMapSample s = sample_boundary(v, point, opts);
    MoebiusFit fit = moebius_fit(s);
    json header = provenance("boundary-sample", vaut_file + " budget=" + std::to_string(budget), seed);
    header["orientation"] = s.orientation;
    header["pairs"] = s.size();
    header["moebius_fit_residual"] = fit.residual;
    header["quasisymmetry_ratio"] = quasisymmetry_ratio(s);
    if (out.empty()) {
        std::cout << header.dump(2) << "\n";
    } else {
        write_sample_csv(out, s, header);
    }
    return 0;
}

int run_ord(int genus, const std::string& word_text, int depth, std::uint64_t seed) {
    SurfaceGroupPresentation p(genus);
    LevelSpec lv = LevelSpec::a_chain(p, depth, 2);
    Word w = parse_word(word_text);
    OrdResult r = ord(w, lv);
    json doc;
    doc["provenance"] = provenance("ord", word_text + " depth=" + std::to_string(depth), seed);
    doc["word"] = to_string(w);
    doc["depth"] = r.depth;
    if (r.infinity_at_level)
        doc["ord"] = "INFINITY_AT_LEVEL";
    else
        doc["ord"] = r.value;
    doc["distance_to_identity"] = profinite_distance(Word{}, w, lv);
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_solenoid_act(int genus, const std::string& word_text, bool rotation, int depth,
                     std::uint64_t seed) {
    SurfaceGroupPresentation p(genus);
    FundamentalPolygon poly = polygon_group(genus);
    LevelSpec lv = LevelSpec::a_chain(p, depth, 2);
    SolenoidPoint base = solenoid_base_point(depth);
    MoebiusMap gamma;
    VirtualAutomorphism v;
    if (rotation) {
        gamma = to_half_plane(DiskMap::rotation(2 * M_PI / (4 * genus)));
        v = vaut_from_moebius(gamma, poly, 3);
    } else {
        Word g = parse_word(word_text);
        gamma = poly.rep.eval(g);
        v = inner(g, p);
    }
    SolenoidPoint img = extend_to_solenoid(gamma, v, base, poly, lv);
    BaseLeafResult bl = base_leaf_test(img, lv, 4);
    json doc;
    doc["provenance"] = provenance("solenoid-act", word_text, seed);
    doc["z"] = {img.z.real(), img.z.imag()};
    doc["base_leaf_witness"] = bl.found ? to_string(bl.witness) : "NONE_AT_BUDGET";
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_measure(int genus, long samples, int cylinder_index, std::uint64_t seed) {
    FundamentalPolygon poly = polygon_group(genus);
    double frac = cylinder_index > 0 ? 1.0 / cylinder_index : 1.0;
    MeasureEstimate full = measure_report(poly, Region::full(), frac, samples, seed);
    json doc;
    doc["provenance"] = provenance("measure", "samples=" + std::to_string(samples), seed);
    doc["value"] = full.value;
    doc["standard_error"] = full.se;
    doc["expected_full_polygon"] = 4 * M_PI * (genus - 1) * frac;
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run_density_probe(bool arith, int max_len, double eps, const std::string& out, std::uint64_t seed) {
    std::vector<MoebiusMap> gens;
    std::string kind;
    if (arith) {
        gens = arithmetic_sample_generators();
        kind = "arithmetic (modular group with Hecke conjugators; ILLUSTRATIVE: "
               "neither co-compact nor torsion-free)";
    } else {
        gens = polygon_group(2).rep.gens;
        kind = "discrete (genus-2 polygon group)";
    }
    DensityProbeOptions opts;
    opts.eps = eps;
    std::ostringstream csv;
    csv << "# " << provenance("density-probe", kind, seed).dump() << "\n";
    csv << "L,coverage,products\n";
    for (int len = 2; len <= max_len; len += 2) {
        DensityProbeResult r = density_probe(gens, len, opts);
        csv << len << "," << r.coverage << "," << r.products << "\n";
    }
    if (out.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream f(out);
        f << csv.str();
    }
    return 0;
}

int run_forms(const std::string& mode, int genus, long samples, double norm_cap, std::uint64_t seed) {
    SurfaceGroupPresentation p(genus);
    FundamentalPolygon poly = polygon_group(genus);
    CosetTable whole = CosetTable::whole_group(p);
    std::vector<std::vector<int>> fwd(p.num_generators(), {0, 1});
    fwd[0] = {1, 0};
    CosetTable h = CosetTable::from_perms(p, fwd, 0);
    json doc;
    doc["provenance"] = provenance("forms-" + mode, "samples=" + std::to_string(samples), seed);

    if (mode == "transfer-check") {
        SeriesOptions so;
        so.norm_cap = norm_cap;
        AutomorphicForm f = poincare_series(poly, whole, 2, 1, so);
        AutomorphicForm tpf = transfer(pullback(f, h), whole, poly);
        auto rng = seeded_rng(seed, 1);
        std::uniform_real_distribution<double> ur(-0.1, 0.1);
        double worst = 0;
        for (int t = 0; t < 20; ++t) {
            Complex z(ur(rng), ur(rng));
            worst = std::max(worst, std::abs(tpf(z) - f(z)) / std::max(1e-12, std::abs(f(z))));
        }
        doc["max_relative_defect"] = worst;
        std::cout << doc.dump(2) << "\n";
        return worst < 1e-6 ? 0 : 2;
    }
    if (mode == "gram") {
        SampleGrid grid = polygon_samples(poly, samples, seed);
        SeriesOptions so;
        so.norm_cap = norm_cap;
        std::vector<AutomorphicForm> forms;
        for (int m = 0; m < 5; ++m) {
            so.seed_pole = 1.25 * std::polar(1.0, 2 * M_PI * m / 5.0);
            forms.push_back(poincare_series(poly, whole, 2, 3, so));
        }
        GramMatrix g = gram_matrix(forms, poly, grid);
        json rows = json::array();
        for (int a = 0; a < g.size(); ++a) {
            json row = json::array();
            for (int b = 0; b < g.size(); ++b)
                row.push_back({g.entries[a][b].real(), g.entries[a][b].imag()});
            rows.push_back(row);
        }
        doc["gram"] = rows;
        doc["max_se"] = g.max_se;
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    if (mode == "rank") {
        SampleGrid grid = polygon_samples(poly, samples, seed);
        SeriesOptions so;
        so.norm_cap = norm_cap;
        std::vector<AutomorphicForm> forms;
        for (int m = 0; m < 6; ++m) {
            so.seed_pole = 1.2 * std::polar(1.0, 2 * M_PI * m / 6.0);
            forms.push_back(poincare_series(poly, whole, 2, 4, so));
        }
        RankReport rep = rank_check(forms, poly, grid, form_space_dimension(genus, 2));
        doc["rank"] = rep.numeric_rank;
        doc["expected"] = rep.expected;
        doc["pass"] = rep.pass;
        doc["ill_conditioned"] = rep.ill_conditioned;
        std::cout << doc.dump(2) << "\n";
        return rep.pass ? 0 : 2;
    }
    if (mode == "galois") {
        SampleGrid grid = polygon_samples(poly, samples, seed);
        SeriesOptions so;
        so.norm_cap = norm_cap;
        std::vector<AutomorphicForm> basis;
        for (int m = 0; m < 4; ++m) {
            so.seed_pole = 1.35 * std::polar(1.0, 2 * M_PI * m / 4.0 + 0.4);
            basis.push_back(poincare_series(poly, h, 1, 3, so));
        }
        GaloisActionReport rep = galois_action_check(basis, parse_word("a1"), 2, poly, grid);
        doc["nontriviality"] = rep.nontriviality;
        doc["pass_nontrivial"] = rep.pass_nontrivial;
        doc["minus_one_residual"] = rep.minus_one_residual;
        doc["power_identity_residual"] = rep.power_identity_residual;
        std::cout << doc.dump(2) << "\n";
        return rep.pass_nontrivial ? 0 : 2;
    }
    throw InvariantError("forms: unknown mode " + mode);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"limit constructions over surface groups: subgroup lattices, virtual automorphisms, "
                 "Fuchsian data, solenoids, and i-form bundles"};
    app.require_subcommand(1);
    std::uint64_t seed = 1;
    app.add_option("--seed", seed, "global random seed recorded in outputs");

    int genus = 2, max_index = 2, depth = 3, budget = 2;
    long samples = 20000;
    double eps = 0.15, norm_cap = 1400;
    std::string out, word_text, matrix_text, vaut_file, rep_file;

    auto* sub = app.add_subcommand("subgroups", "enumerate finite-index subgroups as coset tables");
    sub->add_option("--genus", genus)->check(CLI::Range(2, 6));
    sub->add_option("--max-index", max_index)->check(CLI::Range(1, 6));
    sub->add_option("--out", out);

    auto* iv4 = app.add_subcommand("iv4", "non-normalizing commensurability element from an S3 quotient");
    iv4->add_option("--genus", genus)->check(CLI::Range(2, 4));
    iv4->add_option("--out", out);

    auto* eff = app.add_subcommand("effectiveness", "trace-gap witness for the lifted iv4 element");
    eff->add_option("--genus", genus)->check(CLI::Range(2, 4));
    eff->add_option("--out", out);

    auto* stab = app.add_subcommand("stabilizer-check", "polygon rotation fixes the base point");
    stab->add_option("--genus", genus)->check(CLI::Range(2, 4));

    std::string gamma_kind = "rotation";
    auto* comm = app.add_subcommand("comm-certify", "commensurator certificate for a Moebius map");
    comm->add_option("--genus", genus)->check(CLI::Range(2, 4));
    comm->add_option("--depth", depth)->check(CLI::Range(1, 5));
    comm->add_flag_callback("--rotation", [&] { gamma_kind = "rotation"; });
    comm->add_option_function<std::string>(
        "--word",
        [&](const std::string& s) {
            gamma_kind = "word";
            word_text = s;
        },
        "group word realized through the polygon representation");
    comm->add_option_function<std::string>(
        "--matrix",
        [&](const std::string& s) {
            gamma_kind = "matrix";
            matrix_text = s;
        },
        "row-major a,b,c,d");

    std::string trace_csv;
    auto* fricke = app.add_subcommand("fricke", "Fricke-normalized representation solving");
    auto* fricke_solve = fricke->add_subcommand("solve", "complete a partial assignment");
    fricke_solve->add_option("--genus", genus)->check(CLI::Range(3, 5));
    fricke_solve->add_option("--out", out);
    fricke_solve->add_option("--traces", trace_csv, "write the trace coordinate vector as CSV");

    auto* bnd = app.add_subcommand("boundary", "boundary circle maps");
    auto* bnd_sample =
        bnd->add_subcommand("sample", "fixed-point transport sample of a virtual automorphism");
    bnd_sample->add_option("--vaut", vaut_file)->required();
    bnd_sample->add_option("--rep", rep_file);
    bnd_sample->add_option("--budget", budget)->check(CLI::Range(1, 4));
    bnd_sample->add_option("--out", out);

    auto* ordc = app.add_subcommand("ord", "profinite ord and distance of a word");
    ordc->add_option("--genus", genus)->check(CLI::Range(2, 4));
    ordc->add_option("--word", word_text)->required();
    ordc->add_option("--depth", depth)->check(CLI::Range(1, 3));

    bool use_rotation = false;
    auto* sol = app.add_subcommand("solenoid", "truncated solenoid operations");
    auto* sol_act = sol->add_subcommand("act", "extend a realized element to the truncated solenoid");
    sol_act->add_option("--genus", genus)->check(CLI::Range(2, 4));
    sol_act->add_option("--word", word_text);
    sol_act->add_flag("--rotation", use_rotation);
    sol_act->add_option("--depth", depth)->check(CLI::Range(1, 3));

    int cylinder_index = 0;
    auto* meas = app.add_subcommand("measure", "Monte Carlo solenoid measure of the full polygon");
    meas->add_option("--genus", genus)->check(CLI::Range(2, 4));
    meas->add_option("--samples", samples);
    meas->add_option("--cylinder-index", cylinder_index,
                     "restrict the fiber to one coset of this index");

    bool arith = false, generic = false;
    int probe_len = 8;
    auto* dens = app.add_subcommand("density-probe", "orbit coverage of an identity neighborhood");
    dens->add_flag("--arith", arith);
    dens->add_flag("--generic", generic);
    dens->add_option("--L", probe_len)->check(CLI::Range(2, 14));
    dens->add_option("--eps", eps);
    dens->add_option("--out", out);

    std::string forms_mode;
    auto* forms = app.add_subcommand("forms", "Poincare series experiments");
    forms->add_option("mode", forms_mode, "gram | transfer-check | rank | galois")->required();
    forms->add_option("--genus", genus)->check(CLI::Range(2, 3));
    forms->add_option("--samples", samples);
    forms->add_option("--norm-cap", norm_cap);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help exits clean; any parse problem is a config error
    }

    try {
        if (*sub) return run_subgroups(genus, max_index, out, seed);
        if (*iv4) return run_iv4(genus, out, seed);
        if (*eff) return run_effectiveness(genus, out, seed);
        if (*stab) return run_stabilizer_check(genus, seed);
        if (*comm) return run_comm_certify(genus, depth, gamma_kind, word_text, matrix_text, seed);
        if (*fricke_solve) return run_fricke_solve(genus, seed, out, trace_csv);
        if (*bnd_sample) return run_boundary_sample(vaut_file, rep_file, budget, out, seed);
        if (*ordc) return run_ord(genus, word_text, depth, seed);
        if (*sol_act) return run_solenoid_act(genus, word_text, use_rotation, depth, seed);
        if (*meas) return run_measure(genus, samples, cylinder_index, seed);
        if (*dens) {
            if (arith == generic) {
                std::cerr << "density-probe: choose exactly one of --arith / --generic\n";
                return 1;
            }
            return run_density_probe(arith, probe_len, eps, out, seed);
        }
        if (*forms) return run_forms(forms_mode, genus, samples, norm_cap, seed);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition: " << e.what() << "\n";
        return 1;
    } catch (const InvariantError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 1;
    } catch (const ResourceCapError& e) {
        std::cerr << "resource cap: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "json: " << e.what() << "\n";
        return 1;
    }
}
