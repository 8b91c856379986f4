from .blockchain import BlockchainAddress, extract_blockchain_addresses
from .platforms import (
    PlatformCatalog,
    PlatformEntry,
    extract_platform_id,
    load_platform_catalog,
    lookup_platform,
)
from .detectors import (
    FilterResult,
    MonetizationHit,
    ReviewItem,
    channel_summary,
    cross_community_filter,
    detect_affiliate,
    detect_amazon_pages,
    detect_channel_addresses,
    detect_custom_shop,
    detect_occurrences,
    detect_platform,
    detect_url,
    load_allowdeny,
    load_shop_keywords,
    read_hits,
    write_hits,
    write_review_queue,
)

__all__ = [
    "BlockchainAddress", "extract_blockchain_addresses", "PlatformCatalog", "PlatformEntry",
    "extract_platform_id", "load_platform_catalog", "lookup_platform", "FilterResult",
    "MonetizationHit", "ReviewItem", "channel_summary", "cross_community_filter", "detect_affiliate",
    "detect_amazon_pages", "detect_channel_addresses", "detect_custom_shop", "detect_occurrences",
    "detect_platform", "detect_url", "load_allowdeny", "load_shop_keywords", "read_hits",
    "write_hits", "write_review_queue",
]
