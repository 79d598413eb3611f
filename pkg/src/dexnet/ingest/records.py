from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from decimal import Decimal
from typing import Mapping

from ..errors import ConfigurationError
from ..model import PairRecord, TokenRecord

WETH = "0xc02aaa39b223fe8d0a0e5c4f27ead9083c756cc2"
USDC = "0xa0b86991c6218b36c1d19d4a2e9eb0ce3606eb48"
USDT = "0xdac17f958d2ee523a2206206994597c13d831ec7"
DAI = "0x6b175474e89094c44da98b954eedeac495271d0f"
WBTC = "0x2260fac5e5542a773aa44fbcfedf7c193bc2c599"

TRUSTED_TOKENS = (WETH, USDC, USDT, DAI, WBTC)
# WBTC is trusted for pricing but not shielded from removal in attack runs.
PROTECTED_TOKENS = (WETH, USDT, USDC, DAI)


@dataclass(frozen=True)
class PairDaySample:
    pair_address: str
    date: date
    reserve0: Decimal
    reserve1: Decimal
    reserve_usd: Decimal


@dataclass(frozen=True)
class TokenDaySample:
    token_address: str
    date: date
    price_usd: Decimal


@dataclass
class TrustedTokenConfig:
    trusted: tuple[str, ...] = TRUSTED_TOKENS
    reference_prices: Mapping[tuple[str, date], Decimal] = field(default_factory=dict)
    outlier_cap_usd: Decimal = Decimal(10) ** 9
    deviation_factor: Decimal = Decimal(3)

    def __post_init__(self):
        self.trusted = tuple(t.lower() for t in self.trusted)
        if not self.trusted:
            raise ConfigurationError("trusted token list is empty")
        if len(set(self.trusted)) != len(self.trusted):
            raise ConfigurationError("trusted token list has duplicates")
        self.outlier_cap_usd = Decimal(self.outlier_cap_usd)
        self.deviation_factor = Decimal(self.deviation_factor)
        if self.outlier_cap_usd <= 0:
            raise ConfigurationError("outlier cap must be positive")
        if self.deviation_factor <= 1:
            raise ConfigurationError("deviation factor must exceed 1")

    def is_trusted(self, token: str) -> bool:
        return token in self.trusted


@dataclass
class Dataset:
    pairs: list[PairRecord] = field(default_factory=list)
    pair_days: list[PairDaySample] = field(default_factory=list)
    token_days: list[TokenDaySample] = field(default_factory=list)
    tokens: dict[str, TokenRecord] = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.pairs == other.pairs
            and self.pair_days == other.pair_days
            and self.token_days == other.token_days
            and self.tokens == other.tokens
        )
