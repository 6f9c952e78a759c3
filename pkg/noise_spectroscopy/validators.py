#  Copyright 2024 Red Hat, Inc.
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.

import json
import logging
from importlib import resources
from typing import Any, ClassVar, Dict

import jsonschema
from jsonschema.exceptions import SchemaError, ValidationError

DATASET_SCHEMA = "dataset_schema"
REPORT_SCHEMA = "report_schema"
CONFIG_SCHEMA = "config_schema"
SPECTRUM_SCHEMA = "spectrum_schema"

logger = logging.getLogger(__name__)


class Validate:
    schemas: ClassVar[Dict[str, Dict]] = {}

    @classmethod
    def _get_schema(cls, name: str) -> Dict:
        if name in cls.schemas:
            return cls.schemas[name]

        path = resources.files(__package__).joinpath(f"./schema/{name}.json")
        data = path.read_text(encoding="utf-8")
        try:
            schema = json.loads(data)
            validator = jsonschema.validators.validator_for(schema)
            validator.check_schema(schema)
        except json.JSONDecodeError as err:
            logger.error("Can not deserialize JSON schema: %s", str(err))
            raise
        except SchemaError as err:
            logger.error("Incorrect JSON schema: %s", str(err))
            raise
        cls.schemas[name] = schema
        return schema

    @classmethod
    def _validate(cls, name: str, instance: Any, what: str) -> None:
        try:
            jsonschema.validate(
                instance=instance, schema=cls._get_schema(name)
            )
        except ValidationError as err:
            logger.error("%s failed validation, err %s", what, err.message)
            raise

    @classmethod
    def dataset(cls, instance: Dict) -> None:
        cls._validate(DATASET_SCHEMA, instance, "Dataset")

    @classmethod
    def report(cls, instance: Dict) -> None:
        cls._validate(REPORT_SCHEMA, instance, "Report")

    @classmethod
    def config(cls, instance: Dict) -> None:
        cls._validate(CONFIG_SCHEMA, instance, "Config")

    @classmethod
    def spectrum(cls, instance: Dict) -> None:
        cls._validate(SPECTRUM_SCHEMA, instance, "Spectrum")
