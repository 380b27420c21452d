"""License registry.

Ships a small built-in set (the consortium's custom license text is
bundled as a data file); deployments may add entries via configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources


@dataclass
class LicenseInfo:
    license_id: str
    name: str
    url: str = ""
    text: str = ""


def _bundled_text(filename: str) -> str:
    ref = resources.files("consortium_archive").joinpath("data/licenses").joinpath(filename)
    return ref.read_text(encoding="utf-8")


def builtin_licenses() -> dict[str, LicenseInfo]:
    return {
        "CC-BY-4.0": LicenseInfo(
            "CC-BY-4.0",
            "Creative Commons Attribution 4.0 International",
            url="https://creativecommons.org/licenses/by/4.0/",
        ),
        "CC0-1.0": LicenseInfo(
            "CC0-1.0",
            "Creative Commons Zero v1.0 Universal",
            url="https://creativecommons.org/publicdomain/zero/1.0/",
        ),
        "GPL-3.0": LicenseInfo(
            "GPL-3.0",
            "GNU General Public License v3.0",
            url="https://www.gnu.org/licenses/gpl-3.0.html",
        ),
        "MIT": LicenseInfo("MIT", "MIT License", url="https://opensource.org/license/mit/"),
        "bm-2030": LicenseInfo(
            "bm-2030",
            "Consortium Internal Data License",
            text=_bundled_text("bm-2030.txt"),
        ),
    }


class LicenseRegistry:
    def __init__(self, extra: list[LicenseInfo] | None = None):
        self._licenses = builtin_licenses()
        for info in extra or []:
            self._licenses[info.license_id] = info

    def __contains__(self, license_id: str) -> bool:
        return license_id in self._licenses

    def ids(self) -> set[str]:
        return set(self._licenses)

    def get(self, license_id: str) -> LicenseInfo | None:
        return self._licenses.get(license_id)
