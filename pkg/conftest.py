import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "kas3.settings")
django.setup()
