import os
from pymongo import MongoClient
from uuid import uuid4

class AttendeeManager:
    def __init__(self):
        client = MongoClient(os.getenv("MONGODB_URI", ""))
        conference_name = os.getenv("CONF_TITLE", "")
        self.mongo_col = client[conference_name]["attendees"]

    def add_attendee(self, email, name=None, id=None, voucher=None):
        if id == None: id = uuid4()
        attendee = {"name": name, "id": id, "email": email, "voucher": voucher}
        self.mongo_col.insert_one(attendee)
