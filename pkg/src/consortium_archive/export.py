"""Metadata export in the four interchange formats.

All exporters are pure functions of the version snapshot and emit
deterministic bytes: JSON objects are serialized with sorted keys, XML
trees are built in a fixed element order.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET

from .errors import ValidationFailed
from .model import MetadataDocument, RecordVersion

FORMATS = ("json", "json-ld", "datacite-xml", "dublincore-xml")

MEDIA_TYPES = {
    "json": "application/json",
    "json-ld": "application/ld+json",
    "datacite-xml": "application/xml",
    "dublincore-xml": "application/xml",
}

_DC_NS = "http://purl.org/dc/elements/1.1/"
_DATACITE_NS = "http://datacite.org/schema/kernel-4"

ET.register_namespace("dc", _DC_NS)
ET.register_namespace("", _DATACITE_NS)

_SCHEMA_ORG_TYPE = {
    "dataset": "Dataset",
    "software": "SoftwareSourceCode",
    "publication": "ScholarlyArticle",
    "other": "CreativeWork",
}

_DATACITE_GENERAL = {
    "dataset": "Dataset",
    "software": "Software",
    "publication": "Text",
    "other": "Other",
}


def export(version: RecordVersion, fmt: str, publisher: str) -> tuple[bytes, str]:
    """Serialize a version's metadata; returns (document bytes, media type)."""
    if fmt == "json":
        payload = canonical_json_payload(version)
        return _dump_json(payload), MEDIA_TYPES[fmt]
    if fmt == "json-ld":
        return _dump_json(_json_ld_payload(version)), MEDIA_TYPES[fmt]
    if fmt == "datacite-xml":
        return _datacite_xml(version, publisher), MEDIA_TYPES[fmt]
    if fmt == "dublincore-xml":
        return _dublincore_xml(version), MEDIA_TYPES[fmt]
    raise ValidationFailed([("format", f"unknown format: {fmt}")])


def _dump_json(payload: dict) -> bytes:
    return (json.dumps(payload, sort_keys=True, indent=2) + "\n").encode("utf-8")


def canonical_json_payload(version: RecordVersion) -> dict:
    """Full serialization: metadata + version info + file manifest.

    Annotation documents are carried verbatim (as uploaded text) so the
    round trip through :func:`import_metadata_json` is exact.
    """
    return {
        "community": version.shared_with,
        "created_at": version.created_at,
        "files": [f.to_dict() for f in version.files],
        "metadata": version.metadata.to_dict(),
        "owner": version.owner,
        "record_id": version.record_id,
        "shared_at": version.shared_at,
        "state": version.state,
        "tier": version.tier,
        "version_id": version.version_id,
        "version_index": version.version_index,
    }


def import_metadata_json(payload: dict) -> MetadataDocument:
    """Inverse of the canonical json export, metadata part only."""
    if "metadata" not in payload:
        raise ValidationFailed([("metadata", "missing")])
    return MetadataDocument.from_dict(payload["metadata"])


def _json_ld_payload(version: RecordVersion) -> dict:
    md = version.metadata
    creators = []
    for author in md.authors:
        entry: dict = {"@type": "Person", "name": author.name}
        if author.orcid:
            entry["identifier"] = f"https://orcid.org/{author.orcid}"
        if author.affiliations:
            entry["affiliation"] = []
            for aff in author.affiliations:
                org: dict = {"@type": "Organization", "name": aff.name}
                if aff.ror:
                    org["identifier"] = f"https://ror.org/{aff.ror}"
                entry["affiliation"].append(org)
        creators.append(entry)

    doc: dict = {
        "@context": "https://schema.org/",
        "@type": _SCHEMA_ORG_TYPE[md.resource_type],
        "identifier": version.record_id,
        "name": md.title,
        "version": version.version_index,
    }
    if md.description:
        doc["description"] = md.description
    if creators:
        doc["creator"] = creators
    if md.keywords:
        doc["keywords"] = list(md.keywords)
    if md.license:
        doc["license"] = md.license
    if md.publication_date:
        doc["datePublished"] = md.publication_date
    if version.files:
        doc["distribution"] = [
            {
                "@type": "DataDownload",
                "contentSize": f.size,
                "identifier": f.checksum,
                "name": f.name,
            }
            for f in version.files
        ]
    if md.annotations:
        # Semantic side documents embedded as parsed JSON-LD nodes.
        doc["hasPart"] = [
            {
                "@type": "CreativeWork",
                "encodingFormat": a.media_type,
                "name": a.label,
                "mainEntity": json.loads(a.document),
            }
            for a in md.annotations
        ]
    return doc


def _datacite_xml(version: RecordVersion, publisher: str) -> bytes:
    md = version.metadata
    ns = f"{{{_DATACITE_NS}}}"
    root = ET.Element(f"{ns}resource")

    identifier = ET.SubElement(root, f"{ns}identifier", identifierType="Other")
    identifier.text = version.record_id

    creators = ET.SubElement(root, f"{ns}creators")
    for author in md.authors:
        creator = ET.SubElement(creators, f"{ns}creator")
        name = ET.SubElement(creator, f"{ns}creatorName")
        name.text = author.name
        if author.orcid:
            ident = ET.SubElement(
                creator,
                f"{ns}nameIdentifier",
                nameIdentifierScheme="ORCID",
                schemeURI="https://orcid.org",
            )
            ident.text = author.orcid
        for aff in author.affiliations:
            attrs = {}
            if aff.ror:
                attrs = {
                    "affiliationIdentifier": f"https://ror.org/{aff.ror}",
                    "affiliationIdentifierScheme": "ROR",
                }
            affiliation = ET.SubElement(creator, f"{ns}affiliation", **attrs)
            affiliation.text = aff.name

    titles = ET.SubElement(root, f"{ns}titles")
    title = ET.SubElement(titles, f"{ns}title")
    title.text = md.title

    pub = ET.SubElement(root, f"{ns}publisher")
    pub.text = publisher

    year = ET.SubElement(root, f"{ns}publicationYear")
    year.text = (md.publication_date or version.created_at)[:4]

    rtype = ET.SubElement(
        root,
        f"{ns}resourceType",
        resourceTypeGeneral=_DATACITE_GENERAL[md.resource_type],
    )
    rtype.text = md.resource_type

    if md.keywords:
        subjects = ET.SubElement(root, f"{ns}subjects")
        for keyword in md.keywords:
            subject = ET.SubElement(subjects, f"{ns}subject")
            subject.text = keyword

    rights_list = ET.SubElement(root, f"{ns}rightsList")
    rights = ET.SubElement(rights_list, f"{ns}rights", rightsIdentifier=md.license)
    rights.text = md.license

    if md.description:
        descriptions = ET.SubElement(root, f"{ns}descriptions")
        description = ET.SubElement(
            descriptions, f"{ns}description", descriptionType="Abstract"
        )
        description.text = md.description

    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)


def _dublincore_xml(version: RecordVersion) -> bytes:
    md = version.metadata
    dc = f"{{{_DC_NS}}}"
    root = ET.Element("metadata")

    ET.SubElement(root, f"{dc}title").text = md.title
    for author in md.authors:
        ET.SubElement(root, f"{dc}creator").text = author.name
    for keyword in md.keywords:
        ET.SubElement(root, f"{dc}subject").text = keyword
    ET.SubElement(root, f"{dc}description").text = md.description
    ET.SubElement(root, f"{dc}rights").text = md.license
    ET.SubElement(root, f"{dc}date").text = md.publication_date
    ET.SubElement(root, f"{dc}identifier").text = version.record_id
    ET.SubElement(root, f"{dc}type").text = md.resource_type

    return ET.tostring(root, encoding="UTF-8", xml_declaration=True)
