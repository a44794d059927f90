import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "genuine_operads.settings")
django.setup()
