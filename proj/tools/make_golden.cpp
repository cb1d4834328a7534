// Regenerates test fixtures.
//
//   make_golden <output-dir>         a.com: throwaway PKI, signed metapolicy, zone fragment
//   make_golden --scan <output-dir>  100-domain scanner zone, domain list, expected flags

#include "metapolicy/canonical.hpp"
#include "metapolicy/fixtures/generators.hpp"
#include "metapolicy/fixtures/pki.hpp"
#include "metapolicy/publisher.hpp"
#include "metapolicy/trust.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string_view>

namespace mp = metapolicy;
namespace chr = std::chrono;

namespace {

void write(const std::filesystem::path& p, const std::string& content)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out)
        throw std::runtime_error("cannot write " + p.string());
}

int write_scan_fixture(const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    auto fx = mp::fixtures::scan_fixture();
    std::string expected = "domain,spf,dkim,dmarc,dnssec,caa,dane\n";
    for (const auto& d : fx.domains) {
        expected += d.domain.str();
        for (bool f : d.flags)
            expected += f ? ",1" : ",0";
        expected += '\n';
    }
    write(dir / "scan100.zone", fx.zone_text());
    write(dir / "domains.csv", fx.domain_list());
    write(dir / "expected.csv", expected);
    std::cout << "wrote scan fixture to " << dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    if (argc == 3 && std::string_view(argv[1]) == "--scan")
        return write_scan_fixture(argv[2]);
    if (argc != 2) {
        std::cerr << "usage: make_golden [--scan] <output-dir>\n";
        return 64;
    }
    std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir / "roots");

    auto draft = mp::fixtures::example_draft();
    mp::fixtures::PkiOptions opts;
    opts.not_before = chr::sys_days(chr::year{2016} / 1 / 1);
    opts.not_after = chr::sys_days(chr::year{2030} / 1 / 1);
    opts.label = "Golden";
    auto pki = mp::fixtures::make_pki(draft.header.domain, opts);

    // As documented: Parts stays 1 even though the chain makes the text span
    // several records. The finalized copy is the one to publish.
    auto documented = mp::trust::sign(draft, pki.leaf.key, pki.chain(false));
    auto result = mp::publisher::finalize(draft, pki.leaf.key, pki.chain(false));

    write(dir / "roots" / "root.pem", pki.root.cert.to_pem());
    write(dir / "intermediate.pem", pki.intermediate.cert.to_pem());
    write(dir / "leaf.pem", pki.leaf.cert.to_pem());
    write(dir / "chain.pem", pki.leaf.cert.to_pem() + pki.intermediate.cert.to_pem());
    write(dir / "leaf.key", pki.leaf.key.to_pem());
    write(dir / "example.conf", mp::publisher::render_config(draft));
    write(dir / "example.draft.mpol", mp::signing_input(draft));
    write(dir / "example.mpol", mp::canonical_serialize(documented));
    write(dir / "example.published.mpol", mp::canonical_serialize(result.metapolicy));
    write(dir / "example.zone", mp::publisher::emit_zone_fragment(result.records));
    std::cout << "wrote golden fixture to " << dir << '\n';
    return 0;
}
