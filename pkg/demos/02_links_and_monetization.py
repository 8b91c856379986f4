"""From raw message text to monetization hits.

A handful of made-up messages go through URL extraction, normalization, the
resource matcher, the monetization detectors and the wallet address validator.
Nothing touches the network: shortened links stay as they are.

    python3 demos/02_links_and_monetization.py
"""

from importlib import resources as pkg_resources

from conspigraph.ingest import load_catalog
from conspigraph.matcher import match_url
from conspigraph.monetization import detect_url, extract_blockchain_addresses, load_platform_catalog
from conspigraph.urls import extract_urls, is_shortened, load_shorteners, normalize

MESSAGES = [
    "Full thread: https://old.reddit.com/r/conspiracy/comments/abc123/ and https://www.zerohedge.com/news/x (share it!)",
    "Support the channel -> https://www.patreon.com/truthseeker, or www.buymeacoffee.com/truthguy.",
    "Get the book: https://www.Amazon.com/dp/B08XYZ1234?tag=truthguy-20&psc=1#reviews",
    "Our merch: https://shop.example-news.org/hoodies and the wishlist https://www.amazon.de/hz/wishlist/ls/3ABC",
    "Help the farm: https://www.gofundme.com/f/help-the-farm?utm_source=telegram",
    "short link https://bit.ly/3xYzAbc.",
    "BTC bc1qw508d6qejxtdg4y5r3zarvary0c5xw7kv8f3t4 ETH 0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed",
]


def main() -> None:
    shorteners = load_shorteners()
    # the small bundled sample of the resource catalog
    with pkg_resources.as_file(pkg_resources.files("conspigraph.data") / "resources_sample.csv") as path:
        resources = load_catalog(path)
    platforms = load_platform_catalog()

    for text in MESSAGES:
        print(f"\n> {text}")
        for raw in extract_urls(text):
            url = normalize(raw)
            notes = []
            if is_shortened(url, shorteners):
                notes.append("shortened, unresolved offline")
            match = match_url(url, resources)
            if match is not None:
                notes.append(f"resource {match.kind}:{match.matched_identifier}")
            hit = detect_url(url, platforms)
            if hit is not None:
                notes.append(f"{hit.category} on {hit.platform_name} id={hit.extracted_id!r}")
            print(f"  {url}")
            for n in notes or ["no match"]:
                print(f"      {n}")
        for addr in extract_blockchain_addresses(text):
            print(f"  wallet {addr.chain} {addr.address} ({addr.validation})")


if __name__ == "__main__":
    main()
