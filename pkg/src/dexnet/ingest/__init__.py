"""Dataset loading, subgraph crawling and TVL accounting."""

from .dataset import load_fixture, load_reference_prices, normalize_dataset, write_dataset
from .records import (
    DAI,
    PROTECTED_TOKENS,
    TRUSTED_TOKENS,
    USDC,
    USDT,
    WBTC,
    WETH,
    Dataset,
    PairDaySample,
    TokenDaySample,
    TrustedTokenConfig,
)
from .subgraph import SubgraphClient, fetch_pair_day_data, fetch_pairs, fetch_token_day_data
from .tvl import (
    CAP_EXCEEDED,
    PRICE_DEVIATION,
    OutlierReport,
    PoolContribution,
    filter_outliers,
    market_tvl,
    pool_contributions,
    pool_tvl,
    reconstruct_token_tvl,
    trusted_pool_fraction,
    usd,
)

__all__ = [
    "load_fixture",
    "load_reference_prices",
    "normalize_dataset",
    "write_dataset",
    "DAI",
    "PROTECTED_TOKENS",
    "TRUSTED_TOKENS",
    "USDC",
    "USDT",
    "WBTC",
    "WETH",
    "Dataset",
    "PairDaySample",
    "TokenDaySample",
    "TrustedTokenConfig",
    "SubgraphClient",
    "fetch_pair_day_data",
    "fetch_pairs",
    "fetch_token_day_data",
    "CAP_EXCEEDED",
    "PRICE_DEVIATION",
    "OutlierReport",
    "PoolContribution",
    "filter_outliers",
    "market_tvl",
    "pool_contributions",
    "pool_tvl",
    "reconstruct_token_tvl",
    "trusted_pool_fraction",
    "usd",
]
