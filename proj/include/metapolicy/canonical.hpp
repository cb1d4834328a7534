#pragma once

#include "metapolicy/model.hpp"

#include <string>
#include <string_view>
#include <vector>

/// Canonical text form of a metapolicy.
///
/// The layout follows the published example: four sections in fixed order,
/// one `Key: value` per line, fields indented by one space, LF line endings
/// and a blank line between sections and between policy entries:
///
///     Header:
///      Domain: a.com
///      Version: 1
///      Valid From: 12/09/2016 UTC
///      Valid To: 12/09/2018 UTC
///      Parts: 1
///      Subdomains: example.a.com, verbal.a.com
///
///     Policies:
///      Id: 7288
///      Specification: v=spf1 a include:aspmx.googlemail.com ~all
///      Fail: hard, report@a.com
///
///     Signature: rsa-pkcs1-sha256:<base64>
///
///     Certificate: <base64 DER>, <base64 DER>
///
/// A key with an empty value is written without the trailing space. The
/// signed bytes are everything up to and including the last policy's Fail
/// line; a stored draft is exactly those bytes.
namespace metapolicy {

struct Violation
{
    std::string field;
    std::string rule;

    std::string str() const { return field + ": " + rule; }
};

enum class ValidationScope {
    // Everything the text form can express. Used by serialize and parse.
    syntactic,
    // Additionally decodes each certificate and checks issuer/subject linkage.
    full,
};

std::vector<Violation> validate_structure(const Metapolicy& m, ValidationScope scope = ValidationScope::full);
std::vector<Violation> validate_draft(const Draft& d);

std::string canonical_serialize(const Metapolicy& m);
std::string signing_input(const Draft& d);
std::string signing_input(const Metapolicy& m);

Metapolicy parse(std::string_view text);
// Header and Policies sections only (the output of signing_input).
Draft parse_draft(std::string_view text);

// The leading Header fields up to Parts. These always fit in the first
// 512-byte part, so an agent can read the version and part count from part 1.
struct HeaderPrefix
{
    DomainName domain;
    std::uint32_t version = 0;
    ValidityWindow validity;
    std::uint32_t parts = 0;
};

HeaderPrefix parse_header_prefix(std::string_view text);

} // namespace metapolicy
