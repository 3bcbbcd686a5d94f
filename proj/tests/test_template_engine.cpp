#include <doctest.h>

#include "fvqa/template_engine.hpp"
#include "support/fixtures.hpp"

using namespace fvqa;
using namespace fvqa::test;

namespace {

const QuestionTemplate& find_template(const TemplateLibrary& lib, const std::string& id) {
    for (const auto& t : lib.all())
        if (t.template_id == id) return t;
    throw std::runtime_error("missing template " + id);
}

DiversifyPolicy quiet_policy() {
    DiversifyPolicy p;
    p.drop_phrase_prob = 0.0;
    p.truncate_prob = 0.0;
    p.agreement_noise_prob = 0.0;
    return p;
}

} // namespace

TEST_CASE("shipped template library loads clean") {
    Diagnostics diags;
    TemplateLibrary lib = TemplateLibrary::load_file(data_dir() + "/templates.json", diags);
    for (const auto& d : diags) CAPTURE(d.message);
    CHECK_FALSE(has_errors(diags));
    CHECK(lib.all().size() >= 20);
}

TEST_CASE("reference sentences render byte-exactly") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();

    SUBCASE("attr1 category attr2") {
        Binding b;
        const Category& shirt = tax.category("shirt");
        b.category = &shirt;
        b.attr_values = {{"color", "white"}, {"sleeve length type", "long sleeves"}};
        b.agreement = agreement_forms(shirt, 1);
        CHECK(render(find_template(lib, "b2.a1-cat-a2"), b) ==
              "is this a white shirt with long sleeves?");
    }

    SUBCASE("location-led design question") {
        Binding b;
        const Category& sweater = tax.category("sweater");
        b.category = &sweater;
        b.attr_values = {{"pattern", "floral print"}, {"neckline type", "v neck"}};
        b.agreement = agreement_forms(sweater, 1);
        b.location = sweater.default_location;
        CHECK(render(find_template(lib, "b2.loc-cat-a1-a2"), b) ==
              "on the top a sweater with floral print and in v neck design?");
    }

    SUBCASE("what-question with the person-wearing phrase") {
        Binding b;
        const Category& dress = tax.category("a-line dress");
        b.category = &dress;
        b.attribute_display = "color";
        b.agreement = agreement_forms(dress, 1);
        b.location = LocationPhrase{"on the top"};
        CHECK(render(find_template(lib, "nb.what-g1"), b) ==
              "what color is this a-line dress the person wearing on the top?");
    }

    SUBCASE("pronoun-and-location question") {
        Binding b;
        b.attribute_display = "color";
        b.location = LocationPhrase{"on the top"};
        CHECK(render(find_template(lib, "nb.what-one"), b) == "what color is the one on the top?");
    }

    SUBCASE("occasion question with a decorating value") {
        Binding b;
        const Category& dress = tax.category("dress");
        b.category = &dress;
        b.attribute_display = "occasion";
        b.attr_values = {{"color", "yellow"}};
        b.agreement = agreement_forms(dress, 1);
        CHECK(render(find_template(lib, "nb.when-wear-deco"), b) ==
              "when is a good time to wear this yellow dress?");
    }
}

TEST_CASE("render output hygiene") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    const Category& shirt = tax.category("shirt");

    Binding b;
    b.category = &shirt;
    b.attr_values = {{"color", "orange"}};
    b.agreement = agreement_forms(shirt, 1);

    std::string q = render(find_template(lib, "b1.a1-cat"), b);
    CHECK(q == "is this an orange shirt?"); // vowel article
    CHECK(q.find("  ") == std::string::npos);
    CHECK(q.back() == '?');

    // absent location elides the slot and its leading space
    std::string can = render(find_template(lib, "b1.can-a1-cat"), b);
    CHECK(can == "can you see an orange shirt?");
    b.location = shirt.default_location;
    CHECK(render(find_template(lib, "b1.can-a1-cat"), b) ==
          "can you see an orange shirt on the top?");
}

TEST_CASE("render reports the missing slot") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attr_values = {{"color", "white"}}; // ATTR2 missing
    b.agreement = agreement_forms(shirt, 1);
    try {
        render(find_template(lib, "b2.a1-cat-a2"), b);
        FAIL("expected RenderError");
    } catch (const RenderError& e) {
        CHECK(e.slot() == "ATTR2");
    }
}

TEST_CASE("paired categories render pair phrases") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    const Category& boots = tax.category("boots");

    Binding b;
    b.category = &boots;
    b.agreement = agreement_forms(boots, 1);
    CHECK(render(find_template(lib, "b0.cat"), b) == "is this a pair of boots?");

    b.agreement = agreement_forms(boots, 2);
    CHECK(render(find_template(lib, "b0.cat"), b) == "are these pairs of boots?");
}

TEST_CASE("templates_for filters by applicability") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();

    // sleeve length does not apply to apparel bottom
    CHECK(lib.templates_for(std::string("sleeve length type"), tax.category("pants"),
                            AnswerType::binary, tax)
              .empty());

    auto color_shirt =
        lib.templates_for(std::string("color"), tax.category("shirt"), AnswerType::non_binary, tax);
    bool has_is_form = false, has_of_form = false;
    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attribute_display = "color";
    b.agreement = agreement_forms(shirt, 1);
    for (const auto& t : color_shirt) {
        std::string q = render(t, b);
        has_is_form = has_is_form || q.rfind("what color is", 0) == 0;
        has_of_form = has_of_form || q.rfind("what is the color of", 0) == 0;
    }
    CHECK(has_is_form);
    CHECK(has_of_form);

    auto count_q = lib.templates_for(std::string("number of pockets"), tax.category("shirt"),
                                     AnswerType::non_binary, tax);
    bool has_how_many = false, has_what_number = false;
    for (const auto& t : count_q) {
        has_how_many = has_how_many || t.question_type == "how many";
        has_what_number = has_what_number || t.question_type == "what number of";
    }
    CHECK(has_how_many);
    CHECK(has_what_number);

    // occasion opts out of the generic what-questions
    for (const auto& t :
         lib.templates_for(std::string("occasion"), tax.category("dress"), AnswerType::non_binary,
                           tax))
        CHECK(t.question_type != "what {attribute}");

    // deterministic order
    auto again =
        lib.templates_for(std::string("color"), tax.category("shirt"), AnswerType::non_binary, tax);
    REQUIRE(again.size() == color_shirt.size());
    for (size_t i = 0; i < again.size(); ++i)
        CHECK(again[i].template_id == color_shirt[i].template_id);
}

TEST_CASE("diversify: all-zero policy returns only the primary template") {
    TemplateLibrary lib = default_templates();
    auto variants = diversify(find_template(lib, "b2.a1-cat-a2"), quiet_policy(), "k");
    REQUIRE(variants.size() == 1);
    CHECK(variants[0].template_id == "b2.a1-cat-a2");
}

TEST_CASE("diversify: truncation keeps the remainder renderable") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy = quiet_policy();
    policy.truncate_prob = 1.0;

    auto variants = diversify(find_template(lib, "b2.a1-cat-a2"), policy, "k");
    REQUIRE(variants.size() == 2);
    CHECK(variants[1].template_id == "b2.a1-cat-a2~trunc");

    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attr_values = {{"color", "white"}, {"sleeve length type", "long sleeves"}};
    b.agreement = agreement_forms(shirt, 1);
    CHECK(render(variants[1], b) == "a white shirt with long sleeves?");
}

TEST_CASE("diversify: conjunction swap") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy = quiet_policy();
    policy.drop_phrase_prob = 1.0;
    policy.conjunction_alternatives = {"designed with"};

    auto variants = diversify(find_template(lib, "b2.a1-cat-a2"), policy, "k");
    REQUIRE(variants.size() == 2);
    CHECK(variants[1].conjunction == "designed with");

    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attr_values = {{"color", "white"}, {"pattern", "stripe pattern"}};
    b.agreement = agreement_forms(shirt, 1);
    std::string q = render(variants[1], b);
    CHECK(q.find("designed with stripe pattern") != std::string::npos);
}

TEST_CASE("diversify: phrase drop removes a bracketed group") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy = quiet_policy();
    policy.drop_phrase_prob = 1.0;
    policy.conjunction_alternatives.clear();

    auto variants = diversify(find_template(lib, "nb.what-g1"), policy, "k");
    REQUIRE(variants.size() == 2);
    CHECK(variants[1].template_id == "nb.what-g1~drop0");

    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attribute_display = "color";
    b.agreement = agreement_forms(shirt, 1);
    b.location = LocationPhrase{"on the top"};
    CHECK(render(variants[0], b) == "what color is this shirt the person wearing on the top?");
    CHECK(render(variants[1], b) == "what color is this shirt?");
}

TEST_CASE("diversify: agreement noise flips the bundle and flags the variant") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy = quiet_policy();
    policy.agreement_noise_prob = 1.0;

    auto variants = diversify(find_template(lib, "b2.a1-cat-a2"), policy, "k");
    REQUIRE(variants.size() == 2);
    CHECK(variants[1].agreement_noise);

    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attr_values = {{"color", "white"}, {"sleeve length type", "long sleeves"}};
    b.agreement = agreement_forms(shirt, 1);
    CHECK(render(variants[1], b) == "are these white shirts with long sleeves?");
}

TEST_CASE("diversify is deterministic for a fixed key") {
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy; // defaults: small probabilities
    policy.rng_seed = 99;
    for (const auto& t : lib.all()) {
        auto a = diversify(t, policy, "combo|x");
        auto b = diversify(t, policy, "combo|x");
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].template_id == b[i].template_id);
            CHECK(a[i].conjunction == b[i].conjunction);
            CHECK(a[i].agreement_noise == b[i].agreement_noise);
        }
    }
}

TEST_CASE("variant ids resolve back to equivalent templates") {
    Taxonomy tax = default_taxonomy();
    TemplateLibrary lib = default_templates();
    DiversifyPolicy policy = quiet_policy();
    policy.drop_phrase_prob = 1.0;
    policy.truncate_prob = 1.0;
    policy.agreement_noise_prob = 1.0;

    Binding b;
    const Category& shirt = tax.category("shirt");
    b.category = &shirt;
    b.attr_values = {{"color", "white"}, {"sleeve length type", "long sleeves"}};
    b.attribute_display = "color";
    b.agreement = agreement_forms(shirt, 1);
    b.location = shirt.default_location;

    for (const auto& base : lib.all()) {
        if (base.answer_type == AnswerType::non_binary && base.template_id != "nb.what-g1")
            continue;
        for (const auto& variant : diversify(base, policy, "key")) {
            QuestionTemplate resolved = lib.resolve(variant.template_id);
            CHECK(render(resolved, b) == render(variant, b));
        }
    }
    CHECK_THROWS_AS(lib.resolve("nope"), RegistryMissError);
}
