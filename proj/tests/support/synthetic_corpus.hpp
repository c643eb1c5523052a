#pragma once

// Deterministic synthetic DIF corpora with fiscal-flavored filler text.
// Everything is seeded; identical seeds give identical documents.

#include <random>
#include <string>
#include <vector>

#include <json.hpp>

namespace testsupport {

inline const std::vector<std::string>& word_list() {
    static const std::vector<std::string> words = {
        "filing",     "status",     "deduction",  "income",      "resident",
        "schedule",   "form",       "line",       "credit",      "tax",
        "return",     "instructions", "amount",   "threshold",   "exemption",
        "spouse",     "dependent",  "wages",      "interest",    "dividends",
        "withholding", "estimated", "payment",    "penalty",     "refund",
        "adjusted",   "gross",      "taxable",    "standard",    "itemized",
        "household",  "jointly",    "separately", "nonresident", "allocation",
        "apportionment", "worksheet", "attachment", "publication", "guideline"};
    return words;
}

inline std::string random_sentence(std::mt19937& rng, int min_words = 6, int max_words = 14) {
    const auto& words = word_list();
    std::uniform_int_distribution<int> n_dist(min_words, max_words);
    std::uniform_int_distribution<std::size_t> w_dist(0, words.size() - 1);
    std::uniform_int_distribution<int> punct_dist(0, 9);
    int n = n_dist(rng);
    std::string s;
    for (int i = 0; i < n; ++i) {
        std::string w = words[w_dist(rng)];
        if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
        if (!s.empty()) s += ' ';
        s += w;
    }
    int p = punct_dist(rng);
    s += (p == 0) ? "?" : (p == 1) ? "!" : ".";
    return s;
}

inline std::string random_paragraph(std::mt19937& rng, int sentences) {
    std::string s;
    for (int i = 0; i < sentences; ++i) {
        if (!s.empty()) s += ' ';
        s += random_sentence(rng);
    }
    return s;
}

inline const std::vector<std::string>& section_titles() {
    static const std::vector<std::string> titles = {
        "Filing Requirements", "Standard Deduction", "Residency Rules",
        "Credits",             "Payments",           "Penalties and Interest",
        "Income Allocation",   "Recordkeeping"};
    return titles;
}

// One synthetic DIF document of roughly `pages` pages mixing text, tables,
// and image-text blocks.
inline nlohmann::json synthetic_dif_doc(std::mt19937& rng, const std::string& doc_id,
                                        const std::string& authority, int pages) {
    std::uniform_int_distribution<int> blocks_dist(2, 4);
    std::uniform_int_distribution<int> sentences_dist(3, 7);
    std::uniform_int_distribution<int> kind_dist(0, 9);
    std::uniform_int_distribution<int> section_dist(0, 3);
    std::uniform_int_distribution<std::size_t> title_dist(0, section_titles().size() - 1);
    std::uniform_int_distribution<int> row_dist(2, 5);
    std::uniform_int_distribution<int> amount_dist(100, 99999);

    nlohmann::json jpages = nlohmann::json::array();
    for (int p = 1; p <= pages; ++p) {
        nlohmann::json blocks = nlohmann::json::array();
        int n_blocks = blocks_dist(rng);
        for (int b = 0; b < n_blocks; ++b) {
            int kind = kind_dist(rng);
            if (kind < 7) {
                nlohmann::json jb{{"kind", "text"},
                                  {"text", random_paragraph(rng, sentences_dist(rng))}};
                if (section_dist(rng) == 0) jb["section_title"] = section_titles()[title_dist(rng)];
                blocks.push_back(jb);
            } else if (kind < 9) {
                nlohmann::json rows = nlohmann::json::array();
                int n_rows = row_dist(rng);
                for (int r = 0; r < n_rows; ++r) {
                    const auto& words = word_list();
                    std::uniform_int_distribution<std::size_t> w_dist(0, words.size() - 1);
                    rows.push_back({words[w_dist(rng)],
                                    "$" + std::to_string(amount_dist(rng))});
                }
                blocks.push_back({{"kind", "table"},
                                  {"headers", {"Item", "Amount"}},
                                  {"rows", rows},
                                  {"caption", random_sentence(rng, 3, 6)}});
            } else {
                blocks.push_back({{"kind", "image_text"},
                                  {"ocr_text", random_sentence(rng, 5, 10)},
                                  {"descriptor", "flowchart"}});
            }
        }
        jpages.push_back({{"page_number", p}, {"blocks", blocks}});
    }
    return nlohmann::json{{"doc_id", doc_id},
                          {"authority", authority},
                          {"doc_type", "instructions"},
                          {"title", "Synthetic guidance " + doc_id},
                          {"pages", jpages}};
}

struct AuthoritySpec {
    std::string name;
    std::string prefix;
    int docs = 0;
};

// Corpus with per-authority document counts; page counts vary per document.
inline std::vector<nlohmann::json> synthetic_corpus(std::uint32_t seed,
                                                    const std::vector<AuthoritySpec>& spec,
                                                    int min_pages, int max_pages) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> pages_dist(min_pages, max_pages);
    std::vector<nlohmann::json> docs;
    for (const auto& a : spec) {
        for (int i = 0; i < a.docs; ++i) {
            char id[64];
            std::snprintf(id, sizeof(id), "%s-%04d", a.prefix.c_str(), i);
            docs.push_back(synthetic_dif_doc(rng, id, a.name, pages_dist(rng)));
        }
    }
    return docs;
}

}  // namespace testsupport
